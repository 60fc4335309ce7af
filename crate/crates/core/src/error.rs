use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: entries ({row}, {col}) and ({col}, {row}) differ by {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tau = {tau} lies outside [0, 1]")]
    TauOutOfRange { tau: f64 },

    #[error("degenerate spectrum at tau = {tau}: gap {gap:e}")]
    Degenerate { tau: f64, gap: f64 },

    #[error("ambiguous eigenvector matching at tau = {tau} (overlaps {best:.3} and {second:.3}); use a finer grid")]
    AmbiguousMatching { tau: f64, best: f64, second: f64 },

    #[error("eigensolver failed at tau = {tau}: {source}")]
    StepFailed {
        tau: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("model {model} is missing required schedule binding `{binding}`")]
    MissingBinding { model: &'static str, binding: &'static str },

    #[error("operation requires a {expected} model, got {found}")]
    WrongModel { expected: &'static str, found: &'static str },

    #[error("state vector is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("grid mismatch: no frame sample at tau = {tau}")]
    GridMismatch { tau: f64 },

    #[error("frame order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("all infidelities lie outside the fit window; increase the epsilon range")]
    FitFloor,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{context}: {message}")]
    Io { context: String, message: String },

    #[error("{scenario}: {source}")]
    InScenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Short, stable category name used by the command-line driver.
    pub fn category(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. }
            | Error::NoConvergence { .. }
            | Error::DimensionMismatch { .. } => "linalg",
            Error::Degenerate { .. } | Error::AmbiguousMatching { .. } | Error::GridMismatch { .. } => {
                "frame"
            }
            Error::StepFailed { .. } | Error::NotNormalized { .. } => "propagation",
            Error::MissingBinding { .. } | Error::WrongModel { .. } => "model",
            Error::OrderTooHigh { .. } | Error::TauOutOfRange { .. } | Error::InvalidArgument(_) => {
                "argument"
            }
            Error::FitFloor => "fit",
            Error::Io { .. } => "io",
            Error::InScenario { source, .. } => source.category(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
