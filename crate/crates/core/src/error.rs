use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular configuration: {0}")]
    Singularity(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numerical breakdown: {0}")]
    Numerical(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
