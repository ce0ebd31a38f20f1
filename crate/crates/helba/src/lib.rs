//! Low-switching linear contextual bandit computed over encrypted data.
//!
//! The server ([`HelbaServer`]) keeps the design matrix, the reward-weighted
//! feature sum, an approximate inverse and a ridge estimate as ciphertexts.
//! At each step it computes optimistic indexes with an iterative square root,
//! rescales them to [0, 1] and runs an encrypted argmax. The user
//! ([`HelbaUser`]) holds the secret key, decodes the chosen arm and answers
//! masked requests. The estimate is recomputed only when the encrypted batch
//! trace crosses a threshold or the batch has grown geometrically.

// Negated comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
pub mod formulas;
mod protocol;
mod server;
mod telemetry;
mod user;

pub use config::{BanditConfig, BetaVariant};
pub use error::HelbaError;
pub use formulas::beta_tilde;
pub use protocol::{play_step, play_step_with, StepReport};
pub use server::{Choice, HelbaServer, HelbaState, REENC_FRAC_BITS, REENC_MODULUS};
pub use telemetry::{BatchEnd, BatchTrigger, KernelCall, Reencryption, Telemetry};
pub use user::{user_decode, HelbaUser, UserLink};
