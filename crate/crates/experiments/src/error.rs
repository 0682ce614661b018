use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Core(#[from] traction_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialize(String),
}

impl ExperimentError {
    /// Process exit code: configuration problems map to 3, everything else to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config { .. } | ExperimentError::Scenario(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
