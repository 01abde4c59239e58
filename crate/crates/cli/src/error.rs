use std::io;

use thiserror::Error;

/// Failure of a CLI run, carrying the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] y00_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    /// 2 usage or configuration, 3 scale guard, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                y00_core::Error::ScaleGuard(_) => 3,
                y00_core::Error::Numerical(_) => 4,
                y00_core::Error::Config(_) | y00_core::Error::Domain(_) => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
