use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error in {source_name} at line {line}, column {column}: {message}")]
    Parse { source_name: String, line: usize, column: usize, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Parse { .. } | CliError::Invalid(_) => EXIT_DATA,
            CliError::Io { .. } | CliError::Internal(_) => EXIT_INTERNAL,
        })
    }

    pub fn from_json(source_name: impl Into<String>, err: &serde_json::Error) -> Self {
        CliError::Parse {
            source_name: source_name.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
