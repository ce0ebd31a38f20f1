//! Slot-packed encrypted linear algebra.
//!
//! A p x q matrix is packed row-major (entry (i, j) at slot i*q + j) and a
//! vector of length q is replicated p times so that an elementwise product
//! followed by a column sum yields the matrix-vector product. Square products
//! use the sigma/tau diagonal permutations and the psi/phi shifts, applied as
//! free slot permutations, so each product costs exactly one level.

pub mod plain;

use he_emulator::{Ciphertext, HeContext, HeError, Party, Result, SecretKey};

/// Row-major packed matrix.
#[derive(Debug, Clone)]
pub struct PackedMatrix {
    pub ct: Ciphertext,
    pub rows: usize,
    pub cols: usize,
}

impl PackedMatrix {
    pub fn level(&self) -> u32 {
        self.ct.level()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

/// Vector of length `dim` replicated `reps` times.
#[derive(Debug, Clone)]
pub struct PackedVector {
    pub ct: Ciphertext,
    pub reps: usize,
    pub dim: usize,
}

impl PackedVector {
    pub fn level(&self) -> u32 {
        self.ct.level()
    }
}

fn capacity(ctx: &HeContext, len: usize) -> Result<()> {
    if len > ctx.n_slots() {
        return Err(HeError::Shape(format!(
            "{len} packed entries exceed {} slots",
            ctx.n_slots()
        )));
    }
    Ok(())
}

pub fn encode_matrix(ctx: &HeContext, m: &[f64], rows: usize, cols: usize) -> Result<PackedMatrix> {
    if m.len() != rows * cols {
        return Err(HeError::Shape(format!(
            "{} entries given for a {rows}x{cols} matrix",
            m.len()
        )));
    }
    capacity(ctx, m.len())?;
    Ok(PackedMatrix {
        ct: ctx.encrypt(m)?,
        rows,
        cols,
    })
}

pub fn encode_vector(ctx: &HeContext, y: &[f64], reps: usize) -> Result<PackedVector> {
    capacity(ctx, y.len() * reps)?;
    let tiled: Vec<f64> = (0..reps).flat_map(|_| y.iter().copied()).collect();
    Ok(PackedVector {
        ct: ctx.encrypt(&tiled)?,
        reps,
        dim: y.len(),
    })
}

/// Decrypts the `rows * cols` meaningful slots.
pub fn decode_matrix(sk: &SecretKey, m: &PackedMatrix, party: Party) -> Vec<f64> {
    let mut v = sk.decrypt(&m.ct, party);
    v.truncate(m.rows * m.cols);
    v
}

/// Reads the matrix-vector result from a decrypted block layout (first slot
/// of each row block).
pub fn extract_blocks(decrypted: &[f64], p: usize, q: usize) -> Vec<f64> {
    (0..p).map(|i| decrypted[i * q]).collect()
}

/// Ay in row-constant blocks: slot i*q + j holds (Ay)_i. One level.
pub fn mat_vec(ctx: &HeContext, a: &PackedMatrix, y: &PackedVector) -> Result<Ciphertext> {
    if a.cols != y.dim || a.rows != y.reps {
        return Err(HeError::Shape(format!(
            "{}x{} matrix against vector of dim {} replicated {} times",
            a.rows, a.cols, y.dim, y.reps
        )));
    }
    let prod = ctx.mult_ct(&a.ct, &y.ct)?;
    ctx.sum_cols(&prod, a.rows, a.cols)
}

fn slot_map(ctx: &HeContext, p: usize, src: impl Fn(usize, usize) -> usize) -> Vec<Option<usize>> {
    (0..ctx.n_slots())
        .map(|s| (s < p * p).then(|| src(s / p, s % p)))
        .collect()
}

/// Square product MN. One level regardless of size.
pub fn mat_mul(ctx: &HeContext, m: &PackedMatrix, n: &PackedMatrix) -> Result<PackedMatrix> {
    if !m.is_square() || !n.is_square() || m.rows != n.rows {
        return Err(HeError::Shape(format!(
            "mat_mul needs equal square operands, got {}x{} and {}x{}",
            m.rows, m.cols, n.rows, n.cols
        )));
    }
    let p = m.rows;
    if 2 * p * p > ctx.n_slots() {
        return Err(HeError::Shape(format!(
            "mat_mul of size {p} needs {} slots of workspace, backend has {}",
            2 * p * p,
            ctx.n_slots()
        )));
    }
    let mut acc: Option<Ciphertext> = None;
    for k in 0..p {
        let a = ctx.permute(&m.ct, &slot_map(ctx, p, |i, j| i * p + (i + j + k) % p))?;
        let b = ctx.permute(&n.ct, &slot_map(ctx, p, |i, j| ((i + j + k) % p) * p + j))?;
        let term = ctx.mult_ct(&a, &b)?;
        acc = Some(match acc {
            None => term,
            Some(s) => ctx.add(&s, &term)?,
        });
    }
    Ok(PackedMatrix {
        ct: acc.expect("p >= 1"),
        rows: p,
        cols: p,
    })
}

/// Transposes a square packed layout. Free.
pub fn transpose(ctx: &HeContext, ct: &Ciphertext, p: usize) -> Result<Ciphertext> {
    capacity(ctx, p * p)?;
    ctx.permute(ct, &slot_map(ctx, p, |i, j| j * p + i))
}

/// Copies slot 0 into every slot. Free.
pub fn broadcast_slot0(ctx: &HeContext, ct: &Ciphertext) -> Result<Ciphertext> {
    ctx.permute(ct, &vec![Some(0); ctx.n_slots()])
}

fn square_vector(y: &PackedVector) -> Result<usize> {
    if y.reps != y.dim {
        return Err(HeError::Shape(format!(
            "square layout needed, vector of dim {} replicated {} times",
            y.dim, y.reps
        )));
    }
    Ok(y.dim)
}

/// Sum_i u_i y_i where `blocks` holds u in row-constant blocks (the output
/// layout of [`mat_vec`]). The result fills every slot. One level.
pub fn inner_blocks(ctx: &HeContext, blocks: &Ciphertext, y: &PackedVector) -> Result<Ciphertext> {
    let p = square_vector(y)?;
    let yt = transpose(ctx, &y.ct, p)?;
    let prod = ctx.mult_ct(blocks, &yt)?;
    let summed = ctx.sum_cols(&transpose(ctx, &prod, p)?, p, p)?;
    broadcast_slot0(ctx, &summed)
}

/// y^T A y, broadcast to every slot. Two levels.
pub fn quad_form(ctx: &HeContext, a: &PackedMatrix, y: &PackedVector) -> Result<Ciphertext> {
    let u = mat_vec(ctx, a, y)?;
    inner_blocks(ctx, &u, y)
}

/// y y^T as a packed matrix. One level.
pub fn outer(ctx: &HeContext, y: &PackedVector) -> Result<PackedMatrix> {
    let p = square_vector(y)?;
    let yt = transpose(ctx, &y.ct, p)?;
    Ok(PackedMatrix {
        ct: ctx.mult_ct(&yt, &y.ct)?,
        rows: p,
        cols: p,
    })
}

/// Multiplies a replicated vector by an encrypted scalar that fills every
/// slot. One level.
pub fn scale_vector(ctx: &HeContext, y: &PackedVector, s: &Ciphertext) -> Result<PackedVector> {
    Ok(PackedVector {
        ct: ctx.mult_ct(&y.ct, s)?,
        reps: y.reps,
        dim: y.dim,
    })
}

pub fn add_matrices(ctx: &HeContext, a: &PackedMatrix, b: &PackedMatrix) -> Result<PackedMatrix> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(HeError::Shape("matrix dimensions differ".into()));
    }
    Ok(PackedMatrix {
        ct: ctx.add(&a.ct, &b.ct)?,
        rows: a.rows,
        cols: a.cols,
    })
}

pub fn add_vectors(ctx: &HeContext, a: &PackedVector, b: &PackedVector) -> Result<PackedVector> {
    if a.reps != b.reps || a.dim != b.dim {
        return Err(HeError::Shape("vector layouts differ".into()));
    }
    Ok(PackedVector {
        ct: ctx.add(&a.ct, &b.ct)?,
        reps: a.reps,
        dim: a.dim,
    })
}
