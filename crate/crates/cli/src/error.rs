use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hcwalk_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for anything the caller got wrong, 3 for failures while computing
    /// or writing results.
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Json(_) => ExitCode::from(2),
            CliError::Core(hcwalk_core::Error::InvalidArgument(_)) => ExitCode::from(2),
            _ => ExitCode::from(3),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
