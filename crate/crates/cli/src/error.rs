use qimage_core::Error as CoreError;
use thiserror::Error;

/// Failure of one invocation, carrying its process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("resource cap: {0}")]
    ResourceCap(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io(_) => 1,
            Self::Validation(_) => 2,
            Self::ResourceCap(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(_) | CoreError::Pgm(_) => Self::Io(e.to_string()),
            CoreError::ResourceCap(_) => Self::ResourceCap(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}
