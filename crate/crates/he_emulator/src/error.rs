use thiserror::Error;

/// Errors raised by the emulated scheme.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeError {
    #[error("value {value} overflows the fixed-point range at {scale_bits} fractional bits")]
    Overflow { value: String, scale_bits: u32 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("depth exhausted: operation needs {needed} level(s), ciphertext has {available}")]
    DepthExhausted { needed: u32, available: u32 },
    #[error("scale mismatch: {0} vs {1} fractional bits")]
    ScaleMismatch(u32, u32),
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, HeError>;
