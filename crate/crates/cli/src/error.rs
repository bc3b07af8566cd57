use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] concentrate_core::Error),
    #[error("writing output: {0}")]
    Write(#[from] std::io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for bad input, 3 for numerical-domain errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Json { .. } | CliError::Read { .. } => 2,
            CliError::Core(e) if e.is_domain() => 3,
            CliError::Core(_) => 2,
            CliError::Write(_) | CliError::Csv(_) | CliError::Failed(_) => 1,
        }
    }
}
