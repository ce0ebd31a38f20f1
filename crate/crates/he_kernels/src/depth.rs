//! Static level consumption of every kernel, as implemented. `pt` is the
//! level cost of one plaintext product (0 or 1).

fn ceil_log2(n: u32) -> u32 {
    if n <= 1 {
        0
    } else {
        32 - (n - 1).leading_zeros()
    }
}

pub fn f_n(n: u32) -> u32 {
    2 + ceil_log2(n)
}

pub fn new_comp(n: u32, depth: u32, pt: u32) -> u32 {
    depth * f_n(n) + pt
}

pub fn new_max(n: u32, depth: u32, pt: u32) -> u32 {
    if depth == 0 {
        1 + pt
    } else {
        depth * f_n(n) + 1
    }
}

pub fn amax(k: usize, n: u32, depth: u32, pt: u32) -> u32 {
    k.saturating_sub(1) as u32 * new_max(n, depth, pt)
}

/// `d` is the max-phase depth, `d_prime` the compare-phase depth.
pub fn acomp(k: usize, n: u32, d: u32, d_prime: u32, pt: u32) -> u32 {
    amax(k, n, d, pt).max(pt) + new_comp(n, d_prime, pt)
}

pub fn newton_inverse(k1: u32, pt: u32) -> u32 {
    match (pt, k1) {
        (0, 0 | 1) => 0,
        (0, k) => k,
        (_, 0) => 1,
        (_, k) => 1 + k,
    }
}

pub fn he_sqrt(k0: u32, pt: u32) -> u32 {
    match (pt, k0) {
        (0, 0) => 0,
        (0, k) => 2 * k - 1,
        (_, k) => 2 * k + 2,
    }
}

pub fn trace_compare(n: u32, depth: u32, pt: u32) -> u32 {
    pt + new_comp(n, depth, pt)
}

pub const MAT_VEC: u32 = 1;
pub const MAT_MUL: u32 = 1;
pub const QUAD_FORM: u32 = 2;
pub const INNER: u32 = 1;
