use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::ciphertext::{Ciphertext, MAX_RAW};
use crate::config::BackendConfig;
use crate::error::{HeError, Result};
use crate::keys::SecretKey;
use crate::mask::MaskToken;

/// Evaluation context: encryption plus every homomorphic operation.
///
/// Holds no decryption capability. The PRNG (mask offsets, noise) sits behind
/// a mutex so the context can be shared by reference; give each worker its own
/// context for reproducible streams.
#[derive(Debug)]
pub struct HeContext {
    cfg: BackendConfig,
    rng: Mutex<ChaCha12Rng>,
}

fn quantize(v: f64, scale_bits: u32) -> Result<i64> {
    let raw = (v * (scale_bits as f64).exp2()).round();
    if !raw.is_finite() || raw.abs() >= MAX_RAW as f64 {
        return Err(HeError::Overflow {
            value: format!("{v}"),
            scale_bits,
        });
    }
    Ok(raw as i64)
}

fn check_raw(r: i128, scale_bits: u32) -> Result<i64> {
    if r.abs() >= MAX_RAW {
        return Err(HeError::Overflow {
            value: format!("{}", r as f64 / (scale_bits as f64).exp2()),
            scale_bits,
        });
    }
    Ok(r as i64)
}

/// Round-to-nearest product of two fixed-point raws at `s` fractional bits.
fn fx_mul(a: i64, b: i64, s: u32) -> i128 {
    let p = a as i128 * b as i128;
    if s == 0 {
        p
    } else {
        (p + (1i128 << (s - 1))) >> s
    }
}

impl HeContext {
    pub fn new(cfg: BackendConfig) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        Ok(Self {
            cfg,
            rng: Mutex::new(rng),
        })
    }

    /// Creates a context together with the matching secret key.
    pub fn with_key(cfg: BackendConfig) -> Result<(Self, SecretKey)> {
        let ctx = Self::new(cfg)?;
        let sk = SecretKey::new(ctx.cfg.n_slots);
        Ok((ctx, sk))
    }

    /// Same parameters, independent PRNG stream.
    pub fn fork(&self, seed: u64) -> Self {
        let cfg = BackendConfig {
            seed,
            ..self.cfg.clone()
        };
        Self {
            rng: Mutex::new(ChaCha12Rng::seed_from_u64(seed)),
            cfg,
        }
    }

    pub fn config(&self) -> &BackendConfig {
        &self.cfg
    }

    pub fn n_slots(&self) -> usize {
        self.cfg.n_slots
    }

    /// Levels charged by one plaintext-ciphertext product.
    pub fn pt_cost(&self) -> u32 {
        u32::from(self.cfg.pt_mult_costs_level)
    }

    fn check_len(&self, len: usize, what: &str) -> Result<()> {
        if len > self.cfg.n_slots {
            return Err(HeError::Shape(format!(
                "{what} has {len} entries, backend has {} slots",
                self.cfg.n_slots
            )));
        }
        Ok(())
    }

    fn check_ct(&self, ct: &Ciphertext) -> Result<()> {
        if ct.slots.len() != self.cfg.n_slots {
            return Err(HeError::Shape(format!(
                "ciphertext has {} slots, backend has {}",
                ct.slots.len(),
                self.cfg.n_slots
            )));
        }
        Ok(())
    }

    fn check_pair(&self, a: &Ciphertext, b: &Ciphertext) -> Result<()> {
        self.check_ct(a)?;
        self.check_ct(b)?;
        if a.scale_bits != b.scale_bits {
            return Err(HeError::ScaleMismatch(a.scale_bits, b.scale_bits));
        }
        Ok(())
    }

    /// Fresh encryption at full level; unused slots are zero.
    pub fn encrypt(&self, values: &[f64]) -> Result<Ciphertext> {
        self.encrypt_at_scale(values, self.cfg.scale_bits)
    }

    /// Fresh encryption at a custom number of fractional bits. Scale 0 holds
    /// integers, as used for masked residues.
    pub fn encrypt_at_scale(&self, values: &[f64], scale_bits: u32) -> Result<Ciphertext> {
        self.check_len(values.len(), "plaintext")?;
        let mut slots = vec![0i64; self.cfg.n_slots];
        for (s, &v) in slots.iter_mut().zip(values) {
            *s = quantize(v, scale_bits)?;
        }
        Ok(Ciphertext {
            slots,
            level: self.cfg.depth,
            scale_bits,
        })
    }

    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check_pair(a, b)?;
        let slots = a
            .slots
            .iter()
            .zip(&b.slots)
            .map(|(&x, &y)| check_raw(x as i128 + y as i128, a.scale_bits))
            .collect::<Result<_>>()?;
        Ok(Ciphertext {
            slots,
            level: a.level.min(b.level),
            scale_bits: a.scale_bits,
        })
    }

    pub fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Ciphertext) -> Ciphertext {
        Ciphertext {
            slots: a.slots.iter().map(|&x| -x).collect(),
            level: a.level,
            scale_bits: a.scale_bits,
        }
    }

    /// Adds a plaintext vector (shorter vectors are zero-padded). Free.
    pub fn add_plain(&self, a: &Ciphertext, p: &[f64]) -> Result<Ciphertext> {
        self.check_ct(a)?;
        self.check_len(p.len(), "plaintext")?;
        let mut slots = a.slots.clone();
        for (s, &v) in slots.iter_mut().zip(p) {
            *s = check_raw(*s as i128 + quantize(v, a.scale_bits)? as i128, a.scale_bits)?;
        }
        Ok(Ciphertext { slots, ..a.clone() })
    }

    /// Adds the same plaintext constant to every slot. Free.
    pub fn add_scalar(&self, a: &Ciphertext, c: f64) -> Result<Ciphertext> {
        self.add_plain(a, &vec![c; self.cfg.n_slots])
    }

    pub fn mult_ct(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check_pair(a, b)?;
        let level = a.level.min(b.level);
        if level < 1 {
            return Err(HeError::DepthExhausted {
                needed: 1,
                available: level,
            });
        }
        let s = a.scale_bits;
        let mut slots = a
            .slots
            .iter()
            .zip(&b.slots)
            .map(|(&x, &y)| check_raw(fx_mul(x, y, s), s))
            .collect::<Result<Vec<_>>>()?;
        if self.cfg.noise_std > 0.0 {
            let normal = Normal::new(0.0, self.cfg.noise_std)
                .map_err(|e| HeError::InvalidConfig(e.to_string()))?;
            let mut rng = self.rng.lock().expect("backend PRNG poisoned");
            for x in slots.iter_mut() {
                let e = quantize(normal.sample(&mut *rng), s)?;
                *x = check_raw(*x as i128 + e as i128, s)?;
            }
        }
        Ok(Ciphertext {
            slots,
            level: level - 1,
            scale_bits: s,
        })
    }

    /// Slotwise product with a plaintext vector of exactly `n_slots` entries.
    pub fn mult_pt(&self, a: &Ciphertext, p: &[f64]) -> Result<Ciphertext> {
        self.check_ct(a)?;
        if p.len() != self.cfg.n_slots {
            return Err(HeError::Shape(format!(
                "plaintext has {} entries, backend has {} slots",
                p.len(),
                self.cfg.n_slots
            )));
        }
        let cost = self.pt_cost();
        if a.level < cost {
            return Err(HeError::DepthExhausted {
                needed: cost,
                available: a.level,
            });
        }
        let s = a.scale_bits;
        let slots = a
            .slots
            .iter()
            .zip(p)
            .map(|(&x, &v)| check_raw(fx_mul(x, quantize(v, s)?, s), s))
            .collect::<Result<_>>()?;
        Ok(Ciphertext {
            slots,
            level: a.level - cost,
            scale_bits: s,
        })
    }

    /// Multiplies every slot by the same plaintext constant.
    pub fn mult_scalar(&self, a: &Ciphertext, c: f64) -> Result<Ciphertext> {
        self.mult_pt(a, &vec![c; self.cfg.n_slots])
    }

    /// Cyclic left rotation by `k` slots (negative `k` rotates right).
    pub fn rotate(&self, a: &Ciphertext, k: i64) -> Result<Ciphertext> {
        self.check_ct(a)?;
        let n = a.slots.len() as i64;
        if k.abs() >= n {
            return Err(HeError::Shape(format!("rotation {k} out of range for {n} slots")));
        }
        let k = k.rem_euclid(n) as usize;
        let mut slots = a.slots.clone();
        slots.rotate_left(k);
        Ok(Ciphertext { slots, ..a.clone() })
    }

    /// Row sums of a p x q row-major layout; every slot of block `i` receives
    /// the sum of that block. Slots beyond `p*q` are left untouched.
    pub fn sum_cols(&self, a: &Ciphertext, p: usize, q: usize) -> Result<Ciphertext> {
        self.check_ct(a)?;
        if p == 0 || q == 0 || p * q > a.slots.len() {
            return Err(HeError::Shape(format!(
                "sum_cols {p}x{q} does not fit {} slots",
                a.slots.len()
            )));
        }
        let mut slots = a.slots.clone();
        for i in 0..p {
            let block = &a.slots[i * q..(i + 1) * q];
            let total = check_raw(block.iter().map(|&x| x as i128).sum(), a.scale_bits)?;
            slots[i * q..(i + 1) * q].fill(total);
        }
        Ok(Ciphertext { slots, ..a.clone() })
    }

    /// Slot permutation with masking: output slot `i` takes input slot
    /// `map[i]`, or zero when `map[i]` is `None`. Models a fixed schedule of
    /// rotations and plaintext 0/1 masks, so no level is consumed.
    pub fn permute(&self, a: &Ciphertext, map: &[Option<usize>]) -> Result<Ciphertext> {
        self.check_ct(a)?;
        let n = a.slots.len();
        if map.len() != n || map.iter().flatten().any(|&j| j >= n) {
            return Err(HeError::Shape("permutation map does not match slot count".into()));
        }
        let slots = map.iter().map(|m| m.map_or(0, |j| a.slots[j])).collect();
        Ok(Ciphertext { slots, ..a.clone() })
    }

    /// Masks with the configured modulus and fractional bits.
    pub fn mask(&self, a: &Ciphertext) -> Result<(Ciphertext, MaskToken)> {
        self.mask_with(a, self.cfg.modulus_q, self.cfg.mask_frac_bits)
    }

    /// Quantizes every slot to `frac_bits` fractional bits and adds a uniform
    /// offset modulo `q`. The result holds integer residues (scale 0).
    pub fn mask_with(
        &self,
        a: &Ciphertext,
        q: u64,
        frac_bits: u32,
    ) -> Result<(Ciphertext, MaskToken)> {
        self.check_ct(a)?;
        if !(2..=1 << 53).contains(&q) {
            return Err(HeError::InvalidConfig(format!("mask modulus {q} outside [2, 2^53]")));
        }
        if frac_bits > a.scale_bits {
            return Err(HeError::InvalidConfig(format!(
                "mask keeps {frac_bits} fractional bits, ciphertext has {}",
                a.scale_bits
            )));
        }
        let shift = a.scale_bits - frac_bits;
        let mut rng = self.rng.lock().expect("backend PRNG poisoned");
        let mut offsets = Vec::with_capacity(a.slots.len());
        let mut slots = Vec::with_capacity(a.slots.len());
        for &x in &a.slots {
            let quant = if shift == 0 {
                x as i128
            } else {
                (x as i128 + (1i128 << (shift - 1))) >> shift
            };
            let r: u64 = rng.random_range(0..q);
            let m = (quant + r as i128).rem_euclid(q as i128);
            offsets.push(r);
            slots.push(m as i64);
        }
        Ok((
            Ciphertext {
                slots,
                level: a.level,
                scale_bits: 0,
            },
            MaskToken {
                offsets,
                modulus_q: q,
                frac_bits,
            },
        ))
    }

    /// Removes a mask from an encryption of masked residues: subtracts the
    /// offsets modulo q in the plaintext space, lifts to the centered range
    /// and rescales to the working fixed-point scale. Level is preserved.
    pub fn unmask_encrypted(&self, a: &Ciphertext, tok: &MaskToken) -> Result<Ciphertext> {
        self.check_ct(a)?;
        if a.scale_bits != 0 || tok.offsets.len() != a.slots.len() {
            return Err(HeError::Shape("ciphertext does not hold masked residues".into()));
        }
        let s = self.cfg.scale_bits;
        if tok.frac_bits > s {
            return Err(HeError::ScaleMismatch(tok.frac_bits, s));
        }
        let slots = a
            .slots
            .iter()
            .zip(&tok.offsets)
            .map(|(&m, &r)| {
                let v = tok.centered(m as i128, r);
                check_raw(v << (s - tok.frac_bits), s)
            })
            .collect::<Result<_>>()?;
        Ok(Ciphertext {
            slots,
            level: a.level,
            scale_bits: s,
        })
    }
}
