//! Checkpoint files: architecture, trained parameters, the vocabulary
//! hash, a training-config snapshot, and best-epoch statistics.
//!
//! Parameters are stored as decimal strings in shortest round-trip form,
//! which keeps the file diff-able and restores the exact f64 bits on any
//! platform.

use std::path::Path;

use serde::{Deserialize, Serialize};

use molqae::circuit::{ArchConfig, ParamVector};
use molqae::optim::TrainConfig;

use crate::config::engine_name;
use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub arch: ArchInfo,
    pub params: Vec<String>,
    pub vocab_sha256: String,
    pub train_config: TrainSnapshot,
    pub best: BestStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchInfo {
    pub n_qubits: usize,
    pub n_latent: usize,
    pub n_layers: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSnapshot {
    pub max_epochs: usize,
    pub patience: usize,
    pub base_lr: f64,
    pub lambda: f64,
    pub batch_size: usize,
    pub clip_max_norm: f64,
    pub seed: u64,
    pub gradient_engine: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BestStats {
    pub epoch: usize,
    pub avg_loss: f64,
    pub avg_fidelity: f64,
    pub avg_ancilla_dev: f64,
}

impl Checkpoint {
    pub fn build(
        arch: &ArchConfig,
        params: &ParamVector,
        vocab_sha256: String,
        cfg: &TrainConfig,
        best: BestStats,
    ) -> Checkpoint {
        Checkpoint {
            format_version: FORMAT_VERSION,
            arch: ArchInfo {
                n_qubits: arch.n_qubits(),
                n_latent: arch.n_latent(),
                n_layers: arch.n_layers(),
            },
            params: params.values().iter().map(|v| format!("{v}")).collect(),
            vocab_sha256,
            train_config: TrainSnapshot {
                max_epochs: cfg.max_epochs,
                patience: cfg.patience,
                base_lr: cfg.base_lr,
                lambda: cfg.lambda_weight,
                batch_size: cfg.batch_size,
                clip_max_norm: cfg.clip_max_norm,
                seed: cfg.seed,
                gradient_engine: engine_name(cfg.gradient_engine),
            },
            best,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Input(format!("cannot serialize checkpoint: {e}")))?;
        std::fs::write(path, json)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Checkpoint, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Input(format!("cannot read checkpoint {}: {e}", path.display()))
        })?;
        let checkpoint: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("checkpoint {}: {e}", path.display())))?;
        if checkpoint.format_version != FORMAT_VERSION {
            return Err(CliError::Input(format!(
                "unsupported checkpoint version {}",
                checkpoint.format_version
            )));
        }
        Ok(checkpoint)
    }

    pub fn arch_config(&self) -> Result<ArchConfig, CliError> {
        ArchConfig::new(self.arch.n_qubits, self.arch.n_latent, self.arch.n_layers)
            .map_err(CliError::from)
    }

    /// Parses the decimal-string parameters back to their exact values.
    pub fn param_vector(&self) -> Result<ParamVector, CliError> {
        let values: Result<Vec<f64>, _> = self.params.iter().map(|s| s.parse::<f64>()).collect();
        let values =
            values.map_err(|e| CliError::Input(format!("malformed checkpoint parameter: {e}")))?;
        Ok(ParamVector::from_values(values))
    }
}
