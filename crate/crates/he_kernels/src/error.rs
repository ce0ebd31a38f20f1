use he_emulator::HeError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error(transparent)]
    He(#[from] HeError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, KernelError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(KernelError::InvalidParams(msg.into()))
}
