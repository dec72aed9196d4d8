//! Training run configuration: a strict `key.path = value` TOML file.
//! Unknown keys are rejected; every `[train]` entry is optional and falls
//! back to the reference defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use molqae::grad::{GradientEngine, DEFAULT_FD_EPSILON};
use molqae::optim::TrainConfig;

use crate::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub arch: ArchSection,
    #[serde(default)]
    pub train: TrainSection,
    pub out: OutSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    pub vocab: PathBuf,
    /// Fraction of the cleaned corpus used for training (default 0.9);
    /// 1.0 trains on everything and skips the holdout split.
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ArchSection {
    pub latent: usize,
    pub layers: usize,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub base_lr: Option<f64>,
    pub lambda: Option<f64>,
    pub batch_size: Option<usize>,
    pub clip_max_norm: Option<f64>,
    pub seed: Option<u64>,
    pub gradient_engine: Option<String>,
    pub fd_epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutSection {
    pub dir: PathBuf,
}

fn default_train_fraction() -> f64 {
    0.9
}

pub fn parse_engine(name: &str, fd_epsilon: f64) -> Result<GradientEngine, CliError> {
    match name {
        "adjoint" => Ok(GradientEngine::Adjoint),
        "parameter-shift" => Ok(GradientEngine::ParameterShift),
        "parameter-shift-generalized" => Ok(GradientEngine::ParameterShiftGeneralized),
        "finite-diff" => Ok(GradientEngine::FiniteDiff {
            epsilon: fd_epsilon,
        }),
        other => Err(CliError::Input(format!(
            "unknown gradient engine {other:?}; expected adjoint, parameter-shift, \
             parameter-shift-generalized, or finite-diff"
        ))),
    }
}

pub fn engine_name(engine: GradientEngine) -> String {
    engine.name().to_string()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
        if !(config.data.train_fraction > 0.0 && config.data.train_fraction <= 1.0) {
            return Err(CliError::Input(format!(
                "data.train_fraction must lie in (0, 1], got {}",
                config.data.train_fraction
            )));
        }
        Ok(config)
    }

    /// Resolves the `[train]` section (plus CLI overrides already applied
    /// to it) into a full training configuration.
    pub fn train_config(&self, measure_wall_time: bool) -> Result<TrainConfig, CliError> {
        let defaults = TrainConfig::default();
        let fd_epsilon = self.train.fd_epsilon.unwrap_or(DEFAULT_FD_EPSILON);
        let engine = match &self.train.gradient_engine {
            Some(name) => parse_engine(name, fd_epsilon)?,
            None => defaults.gradient_engine,
        };
        let max_epochs = self.train.max_epochs.unwrap_or(defaults.max_epochs);
        let cfg = TrainConfig {
            max_epochs,
            // An implicit patience never exceeds the epoch budget.
            patience: self
                .train
                .patience
                .unwrap_or_else(|| defaults.patience.min(max_epochs)),
            base_lr: self.train.base_lr.unwrap_or(defaults.base_lr),
            lambda_weight: self.train.lambda.unwrap_or(defaults.lambda_weight),
            batch_size: self.train.batch_size.unwrap_or(defaults.batch_size),
            clip_max_norm: self.train.clip_max_norm.unwrap_or(defaults.clip_max_norm),
            seed: self.train.seed.unwrap_or(defaults.seed),
            gradient_engine: engine,
            measure_wall_time,
            ..defaults
        };
        cfg.validate().map_err(CliError::from)?;
        Ok(cfg)
    }
}
