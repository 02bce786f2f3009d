use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Config { path: PathBuf, line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("engine error: {0}")]
    Engine(#[from] adiaphase::Error),
}

pub type CliResult<T> = Result<T, CliError>;
