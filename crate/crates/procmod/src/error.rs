use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}:{line}: {msg}", path.display())]
    Trace { path: PathBuf, line: usize, msg: String },
    #[error("{0}")]
    Core(#[from] procmod_core::Error),
    #[error("synthesis failed for {0}")]
    SynthesisFailed(String),
    #[error("validation rate {0:.4} is below 100%")]
    ValidationFailed(f64),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::SynthesisFailed(_) => 3,
            CliError::ValidationFailed(_) => 4,
            _ => 1,
        }
    }
}
