use thiserror::Error;

/// Errors produced by instance handling, relaxations, rounding and verification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
