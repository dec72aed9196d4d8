//! Hybrid training loop: Adam with bias correction, cosine-annealed
//! learning rate, gradient clipping, early stopping, and best-parameter
//! tracking.

use std::time::Instant;

use crate::circuit::{init_params, ArchConfig, Circuit, ParamLayout, ParamVector};
use crate::data::epoch_shuffle;
use crate::error::{Error, Result};
use crate::grad::{loss_and_grad, GradientEngine, GradientVector};
use crate::objective::{ObjectiveConfig, BatchMetrics};
use crate::qsim::StateVector;
use crate::smiles::{prep_params, prepare_state, FeatureVector};

/// Training hyperparameters. The defaults reproduce the reference
/// experimental setup: 100 epochs, patience 10, learning rate 3e-4,
/// compression weight 0.01, batch 1024, clip norm 1.0, seed 42, Adam with
/// (0.9, 0.999, 1e-8).
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    pub base_lr: f64,
    pub lambda_weight: f64,
    pub batch_size: usize,
    pub clip_max_norm: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon_adam: f64,
    pub gradient_engine: GradientEngine,
    /// Record wall-clock time per epoch; disable for byte-reproducible
    /// metrics files.
    pub measure_wall_time: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 100,
            patience: 10,
            base_lr: 3e-4,
            lambda_weight: 0.01,
            batch_size: 1024,
            clip_max_norm: 1.0,
            seed: 42,
            beta1: 0.9,
            beta2: 0.999,
            epsilon_adam: 1e-8,
            gradient_engine: GradientEngine::Adjoint,
            measure_wall_time: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "max_epochs and batch_size must be positive".into(),
            ));
        }
        if self.patience == 0 || self.patience > self.max_epochs {
            return Err(Error::Config(format!(
                "patience must lie in 1..=max_epochs, got {}",
                self.patience
            )));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.base_lr) || !positive(self.clip_max_norm) {
            return Err(Error::Config(
                "base_lr and clip_max_norm must be positive".into(),
            ));
        }
        if self.lambda_weight < 0.0 {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn objective(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            lambda_weight: self.lambda_weight,
        }
    }
}

/// Adam moment estimates.
#[derive(Clone, Debug)]
pub struct AdamState {
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(param_len: usize) -> Self {
        AdamState {
            first_moment: vec![0.0; param_len],
            second_moment: vec![0.0; param_len],
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One row of training history.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub avg_loss: f64,
    pub avg_fidelity: f64,
    pub avg_ancilla_dev: f64,
    pub lr: f64,
    pub wall_time_s: f64,
}

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub best_params: ParamVector,
    pub best_epoch: usize,
    pub best_loss: f64,
    pub history: Vec<EpochRecord>,
    pub early_stopped: bool,
}

/// Cosine-annealed learning rate: `eta0 * (1 + cos(pi t / T)) / 2`.
pub fn cosine_lr(epoch: usize, total_epochs: usize, eta0: f64) -> f64 {
    assert!(total_epochs >= 1 && epoch <= total_epochs);
    eta0 * 0.5 * (1.0 + (std::f64::consts::PI * epoch as f64 / total_epochs as f64).cos())
}

/// Rescales the gradient to `max_norm` when its L2 norm exceeds it.
/// Non-finite entries abort with the offending parameter's name.
pub fn clip_gradient(
    grad: &GradientVector,
    max_norm: f64,
    layout: &ParamLayout,
) -> Result<GradientVector> {
    assert!(max_norm > 0.0);
    for (index, g) in grad.values().iter().enumerate() {
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient {
                index,
                name: layout.name_of(index).to_string(),
            });
        }
    }
    let norm = grad.l2_norm();
    if norm <= max_norm {
        return Ok(grad.clone());
    }
    let scale = max_norm / norm;
    Ok(GradientVector::from_values(
        grad.values().iter().map(|g| g * scale).collect(),
    ))
}

/// Bias-corrected Adam update:
/// m ← b1·m + (1-b1)·g, v ← b2·v + (1-b2)·g², θ ← θ − lr·m̂/(√v̂ + ε).
pub fn adam_step(
    params: &mut ParamVector,
    grad: &GradientVector,
    state: &mut AdamState,
    lr: f64,
    cfg: &TrainConfig,
) -> Result<()> {
    assert_eq!(params.len(), grad.len());
    assert_eq!(params.len(), state.first_moment.len());
    state.step += 1;
    let bias1 = 1.0 - cfg.beta1.powi(state.step as i32);
    let bias2 = 1.0 - cfg.beta2.powi(state.step as i32);
    for (index, theta) in params.values_mut().iter_mut().enumerate() {
        let g = grad.values()[index];
        let m = &mut state.first_moment[index];
        let v = &mut state.second_moment[index];
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bias1;
        let v_hat = *v / bias2;
        let update = lr * m_hat / (v_hat.sqrt() + cfg.epsilon_adam);
        if !update.is_finite() {
            return Err(Error::NonFiniteGradient {
                index,
                name: format!("adam update for parameter {index}"),
            });
        }
        *theta -= update;
    }
    Ok(())
}

/// Runs the training loop over featurized molecules on the 8-qubit
/// register. Per epoch: reshuffled batches, loss + gradient with the
/// configured engine, clipping, Adam update; the epoch averages feed best
/// tracking and patience-based early stopping. `on_epoch` fires after each
/// epoch so callers can stream metrics.
pub fn train(
    features: &[FeatureVector],
    arch: &ArchConfig,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if features.is_empty() {
        return Err(Error::Config("training dataset is empty".into()));
    }
    if arch.n_qubits() != crate::smiles::PREP_QUBITS {
        return Err(Error::Config(format!(
            "training expects the {}-qubit molecular register",
            crate::smiles::PREP_QUBITS
        )));
    }

    let circuit = Circuit::new(*arch);
    let layout = circuit.layout().clone();
    let objective = cfg.objective();

    // Input states are fixed by the features; prepare them once.
    let prepared: Vec<StateVector> = features
        .iter()
        .map(|f| prepare_state(&prep_params(f)))
        .collect();

    let mut params = init_params(arch, cfg.seed);
    let mut adam = AdamState::new(params.len());
    let mut best_loss = f64::INFINITY;
    let mut best_params = params.clone();
    let mut best_epoch = 0;
    let mut patience_counter = 0;
    let mut history = Vec::new();
    let mut early_stopped = false;

    for epoch in 0..cfg.max_epochs {
        let started = Instant::now();
        let lr = cosine_lr(epoch, cfg.max_epochs, cfg.base_lr);
        let order = epoch_shuffle(prepared.len(), cfg.seed, epoch);

        let mut batch_fidelities = Vec::new();
        let mut batch_deviations = Vec::new();
        for (batch_index, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<StateVector> =
                chunk.iter().map(|&i| prepared[i].clone()).collect();
            let (metrics, grad) =
                loss_and_grad(cfg.gradient_engine, &batch, &params, arch, &objective)?;
            if !metrics.mean_loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_index,
                });
            }
            batch_fidelities.push(metrics.mean_fidelity);
            batch_deviations.push(metrics.mean_ancilla_dev);
            let clipped = clip_gradient(&grad, cfg.clip_max_norm, &layout)?;
            adam_step(&mut params, &clipped, &mut adam, lr, cfg)?;
        }

        let epoch_metrics =
            BatchMetrics::from_samples(&batch_fidelities, &batch_deviations, &objective);
        let record = EpochRecord {
            epoch,
            avg_loss: epoch_metrics.mean_loss,
            avg_fidelity: epoch_metrics.mean_fidelity,
            avg_ancilla_dev: epoch_metrics.mean_ancilla_dev,
            lr,
            wall_time_s: if cfg.measure_wall_time {
                started.elapsed().as_secs_f64()
            } else {
                0.0
            },
        };
        on_epoch(&record);
        history.push(record);

        if epoch_metrics.mean_loss < best_loss {
            best_loss = epoch_metrics.mean_loss;
            best_params = params.clone();
            best_epoch = epoch;
            patience_counter = 0;
        } else {
            patience_counter += 1;
            if patience_counter >= cfg.patience {
                early_stopped = true;
                break;
            }
        }
    }

    Ok(TrainOutcome {
        best_params,
        best_epoch,
        best_loss,
        history,
        early_stopped,
    })
}
