use std::path::PathBuf;

use raman_comb_core::Error as CoreError;

/// Errors surfaced by the command-line driver.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: not a valid ensemble file ({reason})")]
    Format { path: PathBuf, reason: String },

    #[error("{failed} oracle check(s) failed")]
    OracleFailed { failed: usize },
}

impl CliError {
    pub fn config(key: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 failed oracle, 2 configuration, 3 numerical
    /// validity, 4 IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::OracleFailed { .. } => 1,
            CliError::Config { .. } | CliError::Parse { .. } => 2,
            CliError::Core(e) if e.is_config() => 2,
            CliError::Core(CoreError::InsufficientData { .. } | CoreError::MissingLine(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } | CliError::Format { .. } => 4,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
