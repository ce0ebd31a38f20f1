/// Largest magnitude a raw fixed-point slot may hold.
pub(crate) const MAX_RAW: i128 = 1 << 62;

/// An emulated ciphertext: fixed-point slots plus the remaining
/// multiplicative level.
///
/// The slot values are not reachable through the public API; they can only be
/// read back through [`crate::SecretKey::decrypt`].
#[derive(Clone, PartialEq, Eq)]
pub struct Ciphertext {
    pub(crate) slots: Vec<i64>,
    pub(crate) level: u32,
    pub(crate) scale_bits: u32,
}

impl Ciphertext {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn scale_bits(&self) -> u32 {
        self.scale_bits
    }
}

impl std::fmt::Debug for Ciphertext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ciphertext")
            .field("n_slots", &self.slots.len())
            .field("level", &self.level)
            .field("scale_bits", &self.scale_bits)
            .finish_non_exhaustive()
    }
}
