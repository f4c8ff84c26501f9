use thiserror::Error;

/// Errors produced by instance handling, oracles and solvers.
#[derive(Debug, Error)]
pub enum FmsmError {
    #[error("invalid instance at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported size: {0}")]
    Unsupported(String),
    #[error("generation failed: {0}")]
    Generation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

impl FmsmError {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        FmsmError::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, FmsmError>;
