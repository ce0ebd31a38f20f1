use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::ciphertext::Ciphertext;

/// Who is asking for a decryption. Every call is counted per party so tests
/// can assert that the server never decrypts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    User,
    Server,
    Oracle,
}

static USER_DECRYPTS: AtomicU64 = AtomicU64::new(0);
static SERVER_DECRYPTS: AtomicU64 = AtomicU64::new(0);
static ORACLE_DECRYPTS: AtomicU64 = AtomicU64::new(0);

/// Process-wide decrypt counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecryptAudit {
    pub user: u64,
    pub server: u64,
    pub oracle: u64,
}

pub fn decrypt_audit() -> DecryptAudit {
    DecryptAudit {
        user: USER_DECRYPTS.load(Ordering::SeqCst),
        server: SERVER_DECRYPTS.load(Ordering::SeqCst),
        oracle: ORACLE_DECRYPTS.load(Ordering::SeqCst),
    }
}

/// Decryption capability. Only the user party and test oracles hold one.
#[derive(Debug)]
pub struct SecretKey {
    n_slots: usize,
}

impl SecretKey {
    pub(crate) fn new(n_slots: usize) -> Self {
        Self { n_slots }
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn decrypt(&self, ct: &Ciphertext, party: Party) -> Vec<f64> {
        let counter = match party {
            Party::User => &USER_DECRYPTS,
            Party::Server => &SERVER_DECRYPTS,
            Party::Oracle => &ORACLE_DECRYPTS,
        };
        counter.fetch_add(1, Ordering::SeqCst);
        let scale = (ct.scale_bits as f64).exp2();
        ct.slots.iter().map(|&r| r as f64 / scale).collect()
    }
}
