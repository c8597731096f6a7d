//! Process exit codes and the error type carrying them.

use std::fmt;
use std::path::Path;

use rapidkit_core::config::ToolkitConfigError;
use rapidkit_core::corpus::RecordError;
use rapidkit_core::inference::{LogError, RunError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_ENDPOINT: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn parse(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn endpoint(message: impl Into<String>) -> Self {
        Self { code: EXIT_ENDPOINT, message: message.into() }
    }

    pub fn findings(message: impl Into<String>) -> Self {
        Self { code: EXIT_FINDINGS, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ToolkitConfigError> for Failure {
    fn from(e: ToolkitConfigError) -> Self {
        Self::config(e.to_string())
    }
}

impl From<RecordError> for Failure {
    fn from(e: RecordError) -> Self {
        match e {
            RecordError::Malformed { .. } => Self::parse(e.to_string()),
            _ => Self::config(e.to_string()),
        }
    }
}

impl From<LogError> for Failure {
    fn from(e: LogError) -> Self {
        match e {
            LogError::Malformed { .. } => Self::parse(e.to_string()),
            LogError::Io { .. } => Self::config(e.to_string()),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Log(l) => l.into(),
            other => Self::config(other.to_string()),
        }
    }
}

pub type CliResult<T = u8> = Result<T, Failure>;
