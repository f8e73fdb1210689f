use std::path::PathBuf;

use rankgm::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}: {reason}")]
    Csv {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("input error: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// 2 for unusable input, 3 for bad configuration, 4 for numeric or
    /// convergence failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Csv { .. } | CliError::Io { .. } | CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Core(e) => match e.root() {
                CoreError::Input { .. } | CoreError::Dimension(_) => 2,
                CoreError::Argument(_) => 3,
                _ => 4,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
