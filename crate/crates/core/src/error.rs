use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("field mismatch: {0}")]
    Field(String),
    #[error("inconsistent tensor layout: {0}")]
    Layout(String),
    #[error("size budget exceeded: {0}")]
    SizeBudget(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("numerical trouble: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("external solver: {0}")]
    Backend(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
