use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(#[from] desitter::Error),

    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),

    #[error("gate failed: {0}")]
    Gate(String),

    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Gate(_) => 4,
            CliError::Verify(_) => 5,
        })
    }
}
