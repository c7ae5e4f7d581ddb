use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{message}")]
    Usage { message: String, usage: Option<String> },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage { message: message.into(), usage: None }
    }

    pub fn missing(flag: &str) -> Self {
        Self::usage(format!("missing required setting --{flag} (or \"{flag}\" in the config file)"))
    }

    pub fn numerical(e: impl std::fmt::Display) -> Self {
        CliError::Numerical(e.to_string())
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Verification(_) => 1,
            CliError::Usage { .. } | CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        })
    }
}
