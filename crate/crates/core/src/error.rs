use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("hyperplane normal is identically zero")]
    ZeroNormal,

    #[error("component gradient is identically zero")]
    ZeroGradient,

    /// The one-dimensional dual problem has no minimizer that the solver could locate.
    #[error("dual problem has no root: {0}")]
    NoRoot(String),

    #[error("index {index} out of range for {len} components")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("intersection of the hyperplane with the domain is empty")]
    EmptySet,

    #[error("estimate is indeterminate: {0}")]
    Indeterminate(String),

    #[error("Jacobian is rank deficient at sample {sample} (sigma_min / sigma_max = {ratio:e})")]
    RankDeficient { sample: usize, ratio: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rate {0} is outside (0, 1)")]
    DegenerateRate(f64),

    #[error("descent audit unavailable: {0}")]
    AuditUnavailable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
