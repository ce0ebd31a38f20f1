use he_emulator::{Ciphertext, HeContext, Party, SecretKey};
use packed_linalg::{encode_vector, PackedVector};

use crate::error::HelbaError;
use crate::formulas::selection_threshold;

/// Requests the server can make of the key holder. Every ciphertext passed
/// here is masked, so the user learns only uniform residues.
pub trait UserLink {
    /// Decrypts masked residues and returns fresh full-level encryptions of
    /// them.
    fn reencrypt(&mut self, masked: &[Ciphertext]) -> Result<Vec<Ciphertext>, HelbaError>;

    /// Decrypts a masked ciphertext and returns its residues.
    fn open_masked(&mut self, masked: &Ciphertext) -> Result<Vec<f64>, HelbaError>;
}

/// The key-holding party: encrypts contexts and rewards, decodes actions
/// and answers masked requests.
#[derive(Debug)]
pub struct HelbaUser {
    ctx: HeContext,
    sk: SecretKey,
    dim: usize,
    arms: usize,
}

impl HelbaUser {
    pub fn new(ctx: HeContext, sk: SecretKey, dim: usize, arms: usize) -> Self {
        Self { ctx, sk, dim, arms }
    }

    pub fn encrypt_context(&self, s: &[f64]) -> Result<PackedVector, HelbaError> {
        if s.len() != self.dim {
            return Err(HelbaError::Protocol(format!(
                "context of length {} for dimension {}",
                s.len(),
                self.dim
            )));
        }
        encode_vector(&self.ctx, s, self.dim).map_err(HelbaError::he(0, "encrypt"))
    }

    /// Reward in every slot.
    pub fn encrypt_reward(&self, r: f64) -> Result<Ciphertext, HelbaError> {
        self.ctx
            .encrypt(&vec![r; self.ctx.n_slots()])
            .map_err(HelbaError::he(0, "encrypt"))
    }

    /// Decrypts the comparison vector and picks the arm.
    pub fn decode_action(&self, b: &Ciphertext, t: usize) -> Result<usize, HelbaError> {
        let v = self.sk.decrypt(b, Party::User);
        user_decode(&v[..self.arms], t)
    }
}

impl UserLink for HelbaUser {
    fn reencrypt(&mut self, masked: &[Ciphertext]) -> Result<Vec<Ciphertext>, HelbaError> {
        masked
            .iter()
            .map(|ct| {
                let residues = self.sk.decrypt(ct, Party::User);
                self.ctx
                    .encrypt_at_scale(&residues, 0)
                    .map_err(HelbaError::he(0, "reencrypt"))
            })
            .collect()
    }

    fn open_masked(&mut self, masked: &Ciphertext) -> Result<Vec<f64>, HelbaError> {
        Ok(self.sk.decrypt(masked, Party::User))
    }
}

/// Arms with b_a >= 1/(4t); returns the one with the largest b_a, ties to
/// the lowest index.
pub fn user_decode(b: &[f64], t: usize) -> Result<usize, HelbaError> {
    let threshold = selection_threshold(t);
    let mut best: Option<usize> = None;
    for (a, &v) in b.iter().enumerate() {
        if v >= threshold && best.is_none_or(|i| v > b[i]) {
            best = Some(a);
        }
    }
    best.ok_or(HelbaError::EmptySelection { t, threshold })
}
