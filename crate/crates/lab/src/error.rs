use thiserror::Error;

/// Everything that stops an experiment before it can report verdicts.
/// All variants map to exit code 2.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] varspace_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

pub(crate) fn config_error(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}
