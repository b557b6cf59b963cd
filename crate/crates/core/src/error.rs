use thiserror::Error;

/// Errors raised by the precoding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration at `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A block-diagonalization null space is smaller than the stream count.
    #[error("infeasible dimensions: {0}")]
    Infeasible(String),

    /// The switch/gain subproblem received an all-zero input matrix.
    #[error("degenerate target: the switch subproblem input is identically zero")]
    DegenerateTarget,

    #[error("zero transmit power: the hybrid precoder output vanishes")]
    ZeroPower,

    #[error("combiner covariance is singular (combiner rank loss) at user {user}, subcarrier {subcarrier}")]
    SingularCombiner { user: usize, subcarrier: usize },

    #[error("search space too large: {0}")]
    SizeCap(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
