use thiserror::Error;

/// Errors raised by model construction, inference kernels and file I/O.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state space: {0}")]
    InvalidStateSpace(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state {state} at (t={t}, j={j}) is outside 1..={num_states}")]
    StateOutOfRange {
        t: usize,
        j: usize,
        state: usize,
        num_states: usize,
    },

    #[error("uniform value {value} at (t={t}, j={j}) is not strictly inside (0, 1)")]
    InvalidUniform { t: usize, j: usize, value: f64 },

    #[error("malformed transition rate row: {0}")]
    InvalidRateRow(String),

    #[error("probability row does not sum to one (sum = {sum})")]
    InvalidProbRow { sum: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observation `{value}` is outside the domain of the {model} observation model")]
    ObservationDomain { value: String, model: &'static str },

    /// The latent matrix has zero prior probability under the model.
    #[error("latent state is infeasible at (t={t}, j={j}): realised transition has zero probability")]
    Infeasible { t: usize, j: usize },

    /// A data-informed normalising constant vanished.
    #[error("data-informed normalising constant is zero at (t={t}, j={j})")]
    ZeroNormaliser { t: usize, j: usize },

    #[error("no starting latent state consistent with the data after {attempts} attempts")]
    NoFeasibleStart { attempts: usize },

    #[error("observations are incompatible with every state of individual {individual} at t={t}")]
    FilterInfeasible { individual: usize, t: usize },

    #[error("enumeration over {size} configurations exceeds the limit of {limit}")]
    EnumerationTooLarge { size: f64, limit: usize },

    #[error("kernel `{kernel}` does not support this model: {reason}")]
    UnsupportedKernel { kernel: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
