use thiserror::Error;

/// Crate-wide error type.
///
/// Variants split into two broad families: configuration/input problems
/// (bad qubit indices, unknown tokens, malformed corpora) and numerical
/// failures detected mid-computation (non-finite losses or gradients,
/// fidelity escaping its bounds). [`Error::is_numerical`] distinguishes
/// them so callers can map to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid qubit count {n}: must be in 1..={max}")]
    InvalidQubitCount { n: usize, max: usize },

    #[error("qubit index {q} out of range for a {n}-qubit state")]
    QubitOutOfRange { q: usize, n: usize },

    #[error("control and target qubits must differ (both {q})")]
    DuplicateQubit { q: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("parameter vector has length {got}, layout requires {want}")]
    ParamLength { got: usize, want: usize },

    #[error("cannot tokenize SMILES: unexpected {found:?} at byte {position} in {smiles:?}")]
    Tokenize {
        smiles: String,
        found: String,
        position: usize,
    },

    #[error("empty SMILES string")]
    EmptySmiles,

    #[error("token {token:?} not present in vocabulary")]
    UnknownToken { token: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("empty batch")]
    EmptyBatch,

    #[error("fidelity {value} outside [0,1] beyond numerical tolerance")]
    FidelityOutOfRange { value: f64 },

    #[error("non-finite gradient entry at parameter {index} ({name})")]
    NonFiniteGradient { index: usize, name: String },

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
}

impl Error {
    /// True for failures of the numerics themselves rather than of the
    /// inputs or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::FidelityOutOfRange { .. }
                | Error::NonFiniteGradient { .. }
                | Error::NonFiniteLoss { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
