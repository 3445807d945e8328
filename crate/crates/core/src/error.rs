use thiserror::Error;

/// Errors raised anywhere in the estimation stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular")]
    Singular,

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("simplex iteration limit reached")]
    IterationLimit,

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("degenerate strip: p'TT'p + sigma^2 vanishes")]
    DegenerateStrip,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("pair (A, C) is not observable")]
    Unobservable,

    #[error("boundedness condition violated: {0}")]
    ConditionViolated(String),

    #[error("true state left the estimated set at step {step} (run {run}, {estimator})")]
    ContainmentViolation {
        step: usize,
        run: usize,
        estimator: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Dimension(msg.into()))
}
