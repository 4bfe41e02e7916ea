use std::path::PathBuf;

/// Errors produced by the geometry, flatness and energy routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("ball B({radius}) around the given center contains no sample points")]
    EmptyBall { radius: f64 },

    #[error("too few points: need at least {needed}, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("vectors are linearly dependent: vector {index} lies in the span of its predecessors")]
    RankDeficient { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rejection sampling failed after {attempts} attempts: {reason}")]
    SamplingFailed { attempts: usize, reason: String },

    #[error("exhaustive evaluation needs {required} curvature evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
