use he_emulator::{Ciphertext, HeContext};

use crate::error::{invalid, Result};
use crate::params::{d5_of, f_n_coefficients, ComparatorParams};

/// f_n(x) = sum_{i<=n} C(2i,i)/4^i x (1 - x^2)^i, slotwise.
pub fn f_n(ctx: &HeContext, x: &Ciphertext, n: u32) -> Result<Ciphertext> {
    if n == 0 {
        return invalid("comparator family index must be >= 1");
    }
    let coef = f_n_coefficients(n);
    let x2 = ctx.mult_ct(x, x)?;
    let u = ctx.add_scalar(&ctx.neg(&x2), 1.0)?;
    let mut pows: Vec<Ciphertext> = vec![u.clone(), u];
    for i in 2..=n as usize {
        let hi = i.next_power_of_two() / 2;
        let next = ctx.mult_ct(&pows[hi], &pows[i - hi])?;
        pows.push(next);
    }
    let mut acc = x.clone();
    for i in 1..=n as usize {
        let scaled = ctx.mult_scalar(x, coef[i])?;
        acc = ctx.add(&acc, &ctx.mult_ct(&scaled, &pows[i])?)?;
    }
    Ok(acc)
}

fn iterate_f(ctx: &HeContext, x: &Ciphertext, n: u32, depth: u32) -> Result<Ciphertext> {
    let mut x = x.clone();
    for _ in 0..depth {
        x = f_n(ctx, &x, n)?;
    }
    Ok(x)
}

fn finish_comp(ctx: &HeContext, fx: &Ciphertext) -> Result<Ciphertext> {
    Ok(ctx.mult_scalar(&ctx.add_scalar(fx, 1.0)?, 0.5)?)
}

/// (f_n^depth(a - b) + 1) / 2, an approximation of 1{a > b}.
pub fn new_comp(ctx: &HeContext, a: &Ciphertext, b: &Ciphertext, n: u32, depth: u32) -> Result<Ciphertext> {
    let x = ctx.sub(a, b)?;
    finish_comp(ctx, &iterate_f(ctx, &x, n, depth)?)
}

/// NewComp against a plaintext threshold `b` (same in every slot).
pub fn new_comp_plain(ctx: &HeContext, a: &Ciphertext, b: f64, n: u32, depth: u32) -> Result<Ciphertext> {
    let x = ctx.add_scalar(a, -b)?;
    finish_comp(ctx, &iterate_f(ctx, &x, n, depth)?)
}

/// (a + b)/2 + ((a - b)/2) f_n^depth(a - b), an approximation of max(a, b).
pub fn new_max(ctx: &HeContext, a: &Ciphertext, b: &Ciphertext, n: u32, depth: u32) -> Result<Ciphertext> {
    let x = ctx.sub(a, b)?;
    let y = ctx.mult_scalar(&ctx.add(a, b)?, 0.5)?;
    let half_diff = ctx.mult_scalar(&x, 0.5)?;
    let fx = iterate_f(ctx, &x, n, depth)?;
    Ok(ctx.add(&y, &ctx.mult_ct(&half_diff, &fx)?)?)
}

/// Sequential NewMax over the list.
pub fn amax(ctx: &HeContext, values: &[Ciphertext], n: u32, depth: u32) -> Result<Ciphertext> {
    let (first, rest) = values
        .split_first()
        .map_or_else(|| invalid("amax of an empty list"), Ok)?;
    rest.iter()
        .try_fold(first.clone(), |m, v| new_max(ctx, &m, v, n, depth))
}

/// Packs scalar ciphertexts (each filling every slot) into one ciphertext
/// with value `a` in slot `a`. Costs one plaintext product.
pub fn pack_scalars(ctx: &HeContext, values: &[Ciphertext]) -> Result<Ciphertext> {
    if values.is_empty() || values.len() > ctx.n_slots() {
        return invalid(format!(
            "cannot pack {} values into {} slots",
            values.len(),
            ctx.n_slots()
        ));
    }
    let mut acc: Option<Ciphertext> = None;
    for (a, v) in values.iter().enumerate() {
        let mut e = vec![0.0; ctx.n_slots()];
        e[a] = 1.0;
        let term = ctx.mult_pt(v, &e)?;
        acc = Some(match acc {
            None => term,
            Some(s) => ctx.add(&s, &term)?,
        });
    }
    Ok(acc.expect("non-empty"))
}

/// Approximate argmax indicator with explicit depths. Each input must fill
/// every slot; slot `a` of the result holds b_a = NewComp(values[a], M).
pub fn acomp_with(ctx: &HeContext, values: &[Ciphertext], params: &ComparatorParams) -> Result<Ciphertext> {
    if !(params.epsilon > 0.0 && params.epsilon < 0.25) {
        return invalid(format!("acomp precision {} must lie in (0, 1/4)", params.epsilon));
    }
    let m = amax(ctx, values, params.n, params.d)?;
    let packed = pack_scalars(ctx, values)?;
    new_comp(ctx, &packed, &m, params.n, params.d_prime)
}

/// Approximate argmax indicator at precision `epsilon`.
pub fn acomp(ctx: &HeContext, values: &[Ciphertext], epsilon: f64, n: u32) -> Result<Ciphertext> {
    let params = ComparatorParams::for_list(epsilon, values.len(), n)?;
    acomp_with(ctx, values, &params)
}

/// delta = NewComp(trace / scale, min(1, C / scale)) at the given depth.
/// `epsilon` is the decision threshold the caller will apply to delta.
pub fn trace_compare(
    ctx: &HeContext,
    trace_sum: &Ciphertext,
    c: f64,
    scale: f64,
    epsilon: f64,
    depth: u32,
) -> Result<Ciphertext> {
    if !(scale > 0.0) {
        return invalid(format!("trace scale must be positive, got {scale}"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return invalid(format!("comparator threshold {epsilon} must lie in (0, 1/2)"));
    }
    let a = ctx.mult_scalar(trace_sum, 1.0 / scale)?;
    new_comp_plain(ctx, &a, (c / scale).min(1.0), 1, depth)
}

/// Depth for [`trace_compare`] from the threshold and the trace precision.
pub fn trace_compare_depth(epsilon: f64, epsilon_prime: f64) -> Result<u32> {
    d5_of(epsilon, epsilon_prime, 1)
}
