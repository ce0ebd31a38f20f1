use serde::{Deserialize, Serialize};

/// Offsets drawn by [`crate::HeContext::mask_with`], kept by the masking party.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskToken {
    pub offsets: Vec<u64>,
    pub modulus_q: u64,
    pub frac_bits: u32,
}

impl MaskToken {
    /// Centered lift of `(m - r) mod q` into `[-q/2, q/2)`.
    pub(crate) fn centered(&self, m: i128, r: u64) -> i128 {
        let q = self.modulus_q as i128;
        let d = (m - r as i128).rem_euclid(q);
        if d >= q - q / 2 {
            d - q
        } else {
            d
        }
    }
}

/// Recovers the pre-mask values from decrypted residues.
pub fn unmask(decrypted: &[f64], tok: &MaskToken) -> Vec<f64> {
    let scale = (tok.frac_bits as f64).exp2();
    decrypted
        .iter()
        .zip(&tok.offsets)
        .map(|(&m, &r)| tok.centered(m.round() as i128, r) as f64 / scale)
        .collect()
}
