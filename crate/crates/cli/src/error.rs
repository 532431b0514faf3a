use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] snxp::Error),
}

impl CliError {
    /// 1 for I/O, 2 for usage and malformed input, 3 for numeric failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Core(snxp::Error::Io(_)) => 1,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(snxp::Error::Domain(_)) => 3,
            CliError::Usage(_) | CliError::Core(_) => 2,
        }
    }
}
