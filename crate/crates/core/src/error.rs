use thiserror::Error;

/// Errors raised by the simulation and benchmarking layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read config {path}: {source}")]
    ConfigIo {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse config: {0}")]
    ConfigParse(#[from] serde_json::Error),

    #[error("invalid config field `{field}`: {constraint}")]
    Invalid { field: String, constraint: String },

    #[error("unsupported truncation {0} (expected 1 or 2)")]
    UnsupportedTruncation(usize),

    #[error("time {t} outside [0, {duration}]")]
    Domain { t: f64, duration: f64 },

    #[error("inconsistent schedule: {0}")]
    Schedule(String),

    #[error("target outside achievable range: {0}")]
    OutOfRange(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("channel is not completely positive: min Choi eigenvalue {min_eigenvalue}")]
    NotCompletelyPositive { min_eigenvalue: f64, spectrum: Vec<f64> },

    #[error("odd sequence length {0}; network benchmarking needs even lengths")]
    OddLength(usize),

    #[error("element not found in group: {0}")]
    NotInGroup(String),

    #[error("fit did not converge: {message}")]
    FitFailed {
        message: String,
        initial_guess: [f64; 3],
        residuals: Vec<f64>,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: impl Into<String>, constraint: impl Into<String>) -> Error {
    Error::Invalid {
        field: field.into(),
        constraint: constraint.into(),
    }
}
