//! Fixed-point emulation of a leveled homomorphic encryption scheme.
//!
//! Ciphertexts carry a vector of fixed-point slots and a remaining
//! multiplicative level. Every operation mirrors the level semantics of a
//! leveled scheme: ciphertext products consume one level, plaintext products
//! optionally consume one, and additions, rotations, column sums and slot
//! permutations are free. Running out of levels is an error, never a silent
//! refresh.
//!
//! Decryption goes through [`SecretKey`], which counts calls per [`Party`].

mod ciphertext;
mod config;
mod context;
mod error;
mod keys;
mod mask;

pub use ciphertext::Ciphertext;
pub use config::BackendConfig;
pub use context::HeContext;
pub use error::{HeError, Result};
pub use keys::{decrypt_audit, DecryptAudit, Party, SecretKey};
pub use mask::{unmask, MaskToken};
