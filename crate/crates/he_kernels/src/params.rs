//! Iteration counts and depths derived from the convergence bounds.

use crate::error::{invalid, Result};

/// c_n = (2n+1)/4^n * C(2n, n), the slope of f_n at zero.
pub fn c_n(n: u32) -> f64 {
    let mut binom = 1.0;
    for i in 0..n {
        binom = binom * (2 * n - i) as f64 / (i + 1) as f64;
    }
    (2 * n + 1) as f64 / 4f64.powi(n as i32) * binom
}

fn ceil_count(x: f64) -> u32 {
    if x.is_nan() || x <= 0.0 {
        0
    } else {
        x.ceil() as u32
    }
}

/// Raw value of the inverse-iteration count formula.
pub fn k1_formula(epsilon: f64, lambda_lb: f64, c: f64) -> Result<f64> {
    if !(lambda_lb > 0.0 && lambda_lb < c) {
        return invalid(format!("need 0 < lambda ({lambda_lb}) < c ({c})"));
    }
    if !(epsilon > 0.0 && lambda_lb * epsilon <= 1.0) {
        return invalid(format!("need eps > 0 and lambda * eps <= 1, got eps = {epsilon}"));
    }
    let ratio = (lambda_lb.ln() + epsilon.ln()) / (1.0 - lambda_lb / c).ln();
    Ok(ratio.log2())
}

/// Number of Newton-Schulz iterations that guarantees spectral error
/// `epsilon`, given eigenvalues in [lambda_lb, c].
pub fn k1_of(epsilon: f64, lambda_lb: f64, c: f64) -> Result<u32> {
    Ok(ceil_count(k1_formula(epsilon, lambda_lb, c)?))
}

fn check_sqrt_args(epsilon: f64, c1: f64, c2: f64) -> Result<()> {
    if !(c1 > 0.0 && c1 <= c2 && c2.is_finite()) {
        return invalid(format!("need 0 < c1 ({c1}) <= c2 ({c2})"));
    }
    if !(epsilon > 0.0 && epsilon < c2.sqrt()) {
        return invalid(format!("need 0 < eps ({epsilon}) < sqrt(c2)"));
    }
    Ok(())
}

/// Raw value of the square-root iteration count formula.
pub fn k0_formula(epsilon: f64, c1: f64, c2: f64) -> Result<f64> {
    check_sqrt_args(epsilon, c1, c2)?;
    let num = epsilon.ln() - c2.sqrt().ln();
    let den = 4.0 * (1.0 - c1 / (4.0 * c2)).ln();
    Ok((num / den).log2())
}

/// sqrt(c2) * q_k for the plaintext iteration started at q_0 = z / c2.
pub fn sqrt_iterate(z: f64, c2: f64, k: u32) -> f64 {
    let mut q = z / c2;
    let mut v = q - 1.0;
    for _ in 0..k {
        q *= 1.0 - v / 2.0;
        v = v * v * (v - 3.0) / 4.0;
    }
    c2.sqrt() * q
}

const SQRT_GRID: usize = 64;

fn sqrt_grid_ok(epsilon: f64, c1: f64, c2: f64, k: u32) -> bool {
    (0..SQRT_GRID).all(|i| {
        let z = c1 + (c2 - c1) * i as f64 / (SQRT_GRID - 1) as f64;
        (sqrt_iterate(z, c2, k) - z.sqrt()).abs() <= epsilon
    })
}

/// Square-root iteration count: ceiling of the closed form, increased if
/// direct plaintext iteration over a grid of [c1, c2] misses `epsilon`.
pub fn k0_of(epsilon: f64, c1: f64, c2: f64) -> Result<u32> {
    let mut k = ceil_count(k0_formula(epsilon, c1, c2)?);
    while !sqrt_grid_ok(epsilon, c1, c2, k) {
        if k >= 64 {
            return invalid(format!("sqrt iteration does not reach eps = {epsilon}"));
        }
        k += 1;
    }
    Ok(k)
}

/// Smallest count for which direct iteration meets `epsilon` on the grid.
pub fn k0_direct(epsilon: f64, c1: f64, c2: f64) -> Result<u32> {
    check_sqrt_args(epsilon, c1, c2)?;
    (0..=64)
        .find(|&k| sqrt_grid_ok(epsilon, c1, c2, k))
        .map_or_else(|| invalid("sqrt iteration does not converge"), Ok)
}

/// alpha = 3/2 + 5.2 ln(3/2)/ln 4 + ln(3/2)/(2 ln 2).
pub fn alpha() -> f64 {
    let l = 1.5f64.ln();
    1.5 + 5.2 * l / 4f64.ln() + l / (2.0 * 2f64.ln())
}

/// Comparison depth d_2(eps) = floor(3.2 + ln(1/eps)/ln c_n
/// + ln(ln(1/eps)/ln 2 - 2)/ln(n+1)) + 1. Requires eps < 1/4.
pub fn d2_of(epsilon: f64, n: u32) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return invalid(format!("comparator precision {epsilon} must lie in (0, 1/4)"));
    }
    let inv = (1.0 / epsilon).ln();
    let third = (inv / 2f64.ln() - 2.0).ln() / ((n + 1) as f64).ln();
    let raw = 3.2 + inv / c_n(n).ln() + third;
    Ok(raw.floor().max(0.0) as u32 + 1)
}

/// The alpha-based depth ceil(ln(alpha ln(1/eps)/ln 2 - 2)/ln(3/2)).
pub fn d3_of(epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return invalid(format!("comparator precision {epsilon} must lie in (0, 1/4)"));
    }
    let arg = alpha() * (1.0 / epsilon).ln() / 2f64.ln() - 2.0;
    Ok(ceil_count(arg.ln() / 1.5f64.ln()))
}

/// Depth ceil(ln(ln(1/eps)/ln 2 - 2)/ln c_n) quoted for NewMax. It does not
/// bound the NewMax error by eps on its own; see [`newmax_error_bound`].
pub fn newmax_depth_closed_form(epsilon: f64, n: u32) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 0.25) {
        return invalid(format!("precision {epsilon} must lie in (0, 1/4)"));
    }
    let arg = (1.0 / epsilon).ln() / 2f64.ln() - 2.0;
    Ok(ceil_count(arg.ln() / c_n(n).ln()))
}

/// Plaintext f_n(x) = sum_{i<=n} C(2i,i)/4^i x (1 - x^2)^i.
pub fn f_n_plain(x: f64, n: u32) -> f64 {
    let u = 1.0 - x * x;
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut acc = 0.0;
    for i in 0..=n {
        if i > 0 {
            coef *= (2 * i - 1) as f64 / (2 * i) as f64;
            pow *= u;
        }
        acc += coef * x * pow;
    }
    acc
}

/// Coefficients C(2i,i)/4^i for i = 0..=n.
pub fn f_n_coefficients(n: u32) -> Vec<f64> {
    let mut out = vec![1.0];
    for i in 1..=n {
        let prev = out[i as usize - 1];
        out.push(prev * (2 * i - 1) as f64 / (2 * i) as f64);
    }
    out
}

/// Worst-case |NewMax(a, b) - max(a, b)| over a, b in [0, 1] at the given
/// depth, i.e. sup_x x (1 - f_n^d(x)) / 2 over x in (0, 1], evaluated on a
/// dense log grid with a 1% safety margin.
pub fn newmax_error_bound(n: u32, depth: u32) -> f64 {
    let points = 4000;
    let mut worst: f64 = 0.0;
    for i in 0..=points {
        let x = 10f64.powf(-16.0 * (1.0 - i as f64 / points as f64));
        let mut y = x;
        for _ in 0..depth {
            y = f_n_plain(y, n);
        }
        worst = worst.max(x * (1.0 - y) / 2.0);
    }
    worst * 1.01
}

/// Depth of the max phase of acomp over `k` values: d_2(eps), raised until
/// the accumulated NewMax error (k-1) * bound stays within eps.
pub fn max_phase_depth(epsilon: f64, k: usize, n: u32) -> Result<u32> {
    let mut d = d2_of(epsilon, n)?;
    if k >= 2 {
        while (k - 1) as f64 * newmax_error_bound(n, d) > epsilon {
            d += 1;
        }
    }
    Ok(d)
}

/// Depth of the trace comparator,
/// ceil(3.2 + ln(1/eps')/ln c_n + ln(ln(1/eps)/ln 2 - 2)/ln(n+1)); the last
/// term is dropped when its logarithm is undefined or negative (eps close to
/// 1/2, e.g. 0.45).
pub fn d5_of(epsilon: f64, epsilon_prime: f64, n: u32) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return invalid(format!("comparator threshold {epsilon} must lie in (0, 1/2)"));
    }
    if !(epsilon_prime > 0.0 && epsilon_prime < 1.0) {
        return invalid(format!("trace precision {epsilon_prime} must lie in (0, 1)"));
    }
    let arg = (1.0 / epsilon).ln() / 2f64.ln() - 2.0;
    let third = if arg > 1.0 {
        arg.ln() / ((n + 1) as f64).ln()
    } else {
        0.0
    };
    Ok(ceil_count(3.2 + (1.0 / epsilon_prime).ln() / c_n(n).ln() + third))
}

/// Parameters of the Newton-Schulz inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseParams {
    pub c: f64,
    pub lambda_lb: f64,
    pub k1: u32,
    pub epsilon: f64,
}

impl InverseParams {
    pub fn new(c: f64, lambda_lb: f64, epsilon: f64) -> Result<Self> {
        if c <= 0.0 || lambda_lb <= 0.0 {
            return invalid(format!("need c > 0 and lambda > 0, got c = {c}, lambda = {lambda_lb}"));
        }
        let k1 = k1_of(epsilon, lambda_lb, c)?;
        Ok(Self {
            c,
            lambda_lb,
            k1,
            epsilon,
        })
    }
}

/// Parameters of the iterative square root.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtParams {
    pub c1: f64,
    pub c2: f64,
    pub k0: u32,
    pub epsilon: f64,
}

impl SqrtParams {
    pub fn new(c1: f64, c2: f64, epsilon: f64) -> Result<Self> {
        let k0 = k0_of(epsilon, c1, c2)?;
        Ok(Self {
            c1,
            c2,
            k0,
            epsilon,
        })
    }
}

/// Comparator configuration: `d` is the max-phase depth, `d_prime` the
/// compare-phase depth.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparatorParams {
    pub n: u32,
    pub epsilon: f64,
    pub d: u32,
    pub d_prime: u32,
    pub alpha: f64,
}

impl ComparatorParams {
    /// Depths for an argmax over `k` values at precision `epsilon`.
    pub fn for_list(epsilon: f64, k: usize, n: u32) -> Result<Self> {
        if n == 0 {
            return invalid("comparator family index must be >= 1");
        }
        Ok(Self {
            n,
            epsilon,
            d: max_phase_depth(epsilon, k, n)?,
            d_prime: d2_of(epsilon, n)?,
            alpha: alpha(),
        })
    }
}
