use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: estimate {estimate:e} exceeds tolerance {tolerance:e} ({context})")]
    NonConvergence {
        estimate: f64,
        tolerance: f64,
        context: String,
    },

    #[error("evaluation produced a non-finite value at x = {x}")]
    NonFinite { x: f64 },

    #[error("point x = {x} lies inside the closure of ({lo}, {hi})")]
    PointInsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("linear solver breakdown: {reason} (relative residual {residual:e})")]
    SolverBreakdown { reason: String, residual: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("config{}: `{field}`: {reason}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Config {
        line: Option<usize>,
        field: String,
        reason: String,
    },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
