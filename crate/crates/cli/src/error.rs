use std::path::PathBuf;

use fmsm::FmsmError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] FmsmError),
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const INFEASIBLE: u8 = 4;
    pub const CONFIG: u8 = 5;
    pub const UNSUPPORTED: u8 = 6;
    pub const INTERNAL: u8 = 7;
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) => match e {
                FmsmError::Validation { .. } | FmsmError::Parse(_) => exit::PARSE,
                FmsmError::Argument(_) => exit::USAGE,
                FmsmError::Infeasible(_) => exit::INFEASIBLE,
                FmsmError::Config(_) => exit::CONFIG,
                FmsmError::Unsupported(_) => exit::UNSUPPORTED,
                FmsmError::Generation(_) | FmsmError::Numerical(_) => exit::INTERNAL,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
