use thiserror::Error;

/// Errors surfaced by parsing, parameter validation, and size-limited
/// computations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("indeterminate after maximum refinement: {0}")]
    Indeterminate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
