use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] floquet_coe::Error),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 1 for numerical and I/O failures.
    pub fn exit_code(&self) -> i32 {
        use floquet_coe::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::InvalidParameter(_) | E::SizeLimit(_) | E::Parse { .. }) => 2,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}
