use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    /// The configuration is unusable; nothing was simulated.
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] prlmc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// Process exit code: 3 for configuration and validation problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Json(_) => 3,
            Self::Core(e) => match e {
                prlmc_core::Error::DimensionMismatch { .. }
                | prlmc_core::Error::InvalidParameter(_)
                | prlmc_core::Error::NonContractive(_) => 3,
                _ => 1,
            },
            _ => 1,
        }
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
