use std::path::PathBuf;

/// Stage-level errors with their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Exit code 2: a prerequisite stage has not produced this artifact.
    #[error("missing prerequisite artifact: {0} (run the producing stage first)")]
    MissingPrerequisite(PathBuf),

    /// Exit code 3: the run configuration is invalid.
    #[error("invalid config at {field}: {message}")]
    Config { field: String, message: String },

    #[error("workdir is locked by another running stage: {0}")]
    Locked(PathBuf),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] bizsurv_core::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingPrerequisite(_) => 2,
            CliError::Config { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
