//! The dual training objective: reconstruction fidelity between input and
//! output states, deviation of the ancilla (trash) register from |0⟩, and
//! their weighted combination.

use crate::circuit::{ArchConfig, Circuit, ParamVector};
use crate::error::{Error, Result};
use crate::exec;
use crate::qsim::StateVector;
use crate::smiles::{prep_params, prepare_state, FeatureVector};

/// Tolerance for rounding excursions of |⟨a|b⟩|² outside [0,1]; anything
/// worse indicates a broken invariant upstream.
const FIDELITY_SLACK: f64 = 1e-9;

/// Weight of the ancilla-compression term in the combined loss.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveConfig {
    pub lambda_weight: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        ObjectiveConfig {
            lambda_weight: 0.01,
        }
    }
}

impl ObjectiveConfig {
    pub fn new(lambda_weight: f64) -> Result<Self> {
        if !lambda_weight.is_finite() || lambda_weight < 0.0 {
            return Err(Error::Config(format!(
                "lambda_weight must be a non-negative real, got {lambda_weight}"
            )));
        }
        Ok(ObjectiveConfig { lambda_weight })
    }
}

/// Per-batch means. Fidelity and deviation are averaged per sample with a
/// fixed pairwise tree, then combined, so `mean_loss` satisfies
/// `mean_loss = (1 - mean_fidelity) + lambda * mean_ancilla_dev` exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchMetrics {
    pub mean_loss: f64,
    pub mean_fidelity: f64,
    pub mean_ancilla_dev: f64,
}

impl BatchMetrics {
    pub(crate) fn from_samples(fidelities: &[f64], deviations: &[f64], cfg: &ObjectiveConfig) -> Self {
        let mean_fidelity = exec::pairwise_mean(fidelities);
        let mean_ancilla_dev = exec::pairwise_mean(deviations);
        BatchMetrics {
            mean_loss: loss(mean_fidelity, mean_ancilla_dev, cfg),
            mean_fidelity,
            mean_ancilla_dev,
        }
    }
}

/// Squared overlap |⟨input|output⟩|², clamped against rounding.
pub fn fidelity(input: &StateVector, output: &StateVector) -> Result<f64> {
    let overlap = input.inner_product(output)?;
    let value = overlap.norm_sqr();
    if !(-FIDELITY_SLACK..=1.0 + FIDELITY_SLACK).contains(&value) {
        return Err(Error::FidelityOutOfRange { value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// One minus the probability that every ancilla qubit of the mid-state
/// measures |0⟩.
pub fn ancilla_deviation(mid: &StateVector, arch: &ArchConfig) -> Result<f64> {
    if mid.n_qubits() != arch.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: mid.n_qubits(),
            right: arch.n_qubits(),
        });
    }
    let p_zero = mid.prob_all_zero(&arch.ancilla_qubits())?;
    Ok((1.0 - p_zero).clamp(0.0, 1.0))
}

/// Combined loss `(1 - F) + lambda * D`.
pub fn loss(fidelity: f64, deviation: f64, cfg: &ObjectiveConfig) -> f64 {
    (1.0 - fidelity) + cfg.lambda_weight * deviation
}

/// Per-sample fidelity and deviation for one prepared input state.
pub(crate) fn sample_objective(
    circuit: &Circuit,
    input: &StateVector,
    params: &ParamVector,
) -> Result<(f64, f64)> {
    let (mid, out) = circuit.forward(input, params)?;
    let f = fidelity(input, &out)?;
    let d = ancilla_deviation(&mid, circuit.arch())?;
    Ok((f, d))
}

/// Batch objective over already-prepared input states (any register
/// width), evaluating samples independently and reducing deterministically.
pub fn batch_objective_states(
    inputs: &[StateVector],
    params: &ParamVector,
    arch: &ArchConfig,
    cfg: &ObjectiveConfig,
) -> Result<BatchMetrics> {
    if inputs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let circuit = Circuit::new(*arch);
    let per_sample: Vec<Result<(f64, f64)>> =
        exec::map_collect(inputs, |input| sample_objective(&circuit, input, params));
    let mut fidelities = Vec::with_capacity(inputs.len());
    let mut deviations = Vec::with_capacity(inputs.len());
    for result in per_sample {
        let (f, d) = result?;
        fidelities.push(f);
        deviations.push(d);
    }
    Ok(BatchMetrics::from_samples(&fidelities, &deviations, cfg))
}

/// Batch objective over feature vectors: prepares each molecular state,
/// runs the circuit, and averages per-sample fidelity and deviation.
pub fn batch_objective(
    features: &[FeatureVector],
    params: &ParamVector,
    arch: &ArchConfig,
    cfg: &ObjectiveConfig,
) -> Result<BatchMetrics> {
    if features.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let inputs: Vec<StateVector> = features
        .iter()
        .map(|f| prepare_state(&prep_params(f)))
        .collect();
    batch_objective_states(&inputs, params, arch, cfg)
}
