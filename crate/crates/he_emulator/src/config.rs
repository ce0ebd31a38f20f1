use serde::{Deserialize, Serialize};

use crate::error::{HeError, Result};

/// Parameters of one emulated backend instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    /// Number of slots per ciphertext (power of two).
    pub n_slots: usize,
    /// Depth budget: the level of a fresh ciphertext.
    pub depth: u32,
    /// Fractional bits of the fixed-point encoding.
    pub scale_bits: u32,
    /// Whether a plaintext-ciphertext product consumes a level.
    pub pt_mult_costs_level: bool,
    /// Standard deviation of the Gaussian perturbation added after each
    /// ciphertext-ciphertext product. Zero means exact arithmetic.
    pub noise_std: f64,
    /// Masking modulus.
    pub modulus_q: u64,
    /// Fractional bits kept when a slot is quantized for masking.
    pub mask_frac_bits: u32,
    /// Seed of the backend PRNG (mask offsets and noise).
    pub seed: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            n_slots: 8,
            depth: 100,
            scale_bits: 40,
            pt_mult_costs_level: true,
            noise_std: 0.0,
            modulus_q: 1 << 20,
            mask_frac_bits: 16,
            seed: 0,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.n_slots.is_power_of_two() {
            return Err(HeError::InvalidConfig(format!(
                "n_slots = {} is not a power of two",
                self.n_slots
            )));
        }
        if self.depth < 1 {
            return Err(HeError::InvalidConfig("depth must be at least 1".into()));
        }
        if !(8..=52).contains(&self.scale_bits) {
            return Err(HeError::InvalidConfig(format!(
                "scale_bits = {} outside [8, 52]",
                self.scale_bits
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(HeError::InvalidConfig("noise_std must be finite and >= 0".into()));
        }
        if self.modulus_q < 2 || self.modulus_q > 1 << 53 {
            return Err(HeError::InvalidConfig(format!(
                "modulus_q = {} outside [2, 2^53]",
                self.modulus_q
            )));
        }
        if self.mask_frac_bits > self.scale_bits {
            return Err(HeError::InvalidConfig(
                "mask_frac_bits cannot exceed scale_bits".into(),
            ));
        }
        Ok(())
    }
}
