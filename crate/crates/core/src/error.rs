use thiserror::Error;

/// Errors produced by the library.
///
/// `Regime` and `BudgetExceeded` are kept apart from plain parameter errors
/// because the command-line front end maps them to dedicated exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("{0} is not a prime modulus")]
    NotPrime(u64),

    #[error("parameter regime not supported: {0}")]
    Regime(String),

    #[error("computation budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("zero vector")]
    ZeroVector,

    #[error("vector is not normalized: {0}")]
    Unnormalized(String),

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
