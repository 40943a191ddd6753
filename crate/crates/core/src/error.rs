use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("moment does not exist: {0}")]
    MomentDoesNotExist(String),

    #[error("integration did not reach tolerance: {0}")]
    Tolerance(String),

    #[error(
        "enumeration budget exceeded: {count} compositions > {budget}; use the Monte Carlo method"
    )]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("ranking class size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate case: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
