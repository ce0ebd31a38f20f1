use he_emulator::HeContext;
use packed_linalg::{mat_mul, plain, PackedMatrix};

use crate::error::{invalid, Result};
use crate::params::InverseParams;

fn identity_slots(ctx: &HeContext, p: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; ctx.n_slots()];
    for (s, x) in plain::identity(p).into_iter().enumerate() {
        v[s] = x * scale;
    }
    v
}

fn two_minus(ctx: &HeContext, m: &PackedMatrix) -> Result<PackedMatrix> {
    Ok(PackedMatrix {
        ct: ctx.add_plain(&ctx.neg(&m.ct), &identity_slots(ctx, m.rows, 2.0))?,
        ..m.clone()
    })
}

/// Newton-Schulz inverse: X_0 = I/c, M_0 = V/c, X_{k+1} = X_k (2I - M_k),
/// M_{k+1} = (2I - M_k) M_k. Returns X_{k1}.
pub fn newton_inverse(ctx: &HeContext, v: &PackedMatrix, params: &InverseParams) -> Result<PackedMatrix> {
    if !v.is_square() {
        return invalid(format!("inverse of a {}x{} matrix", v.rows, v.cols));
    }
    if params.c <= 0.0 || params.lambda_lb <= 0.0 {
        return invalid("c and lambda_lb must be positive");
    }
    let p = v.rows;
    let inv_c = 1.0 / params.c;
    if params.k1 == 0 {
        let zero = ctx.mult_scalar(&v.ct, 0.0)?;
        return Ok(PackedMatrix {
            ct: ctx.add_plain(&zero, &identity_slots(ctx, p, inv_c))?,
            ..v.clone()
        });
    }
    let m0 = PackedMatrix {
        ct: ctx.mult_scalar(&v.ct, inv_c)?,
        ..v.clone()
    };
    let t0 = two_minus(ctx, &m0)?;
    let mut x = PackedMatrix {
        ct: ctx.mult_scalar(&t0.ct, inv_c)?,
        ..v.clone()
    };
    if params.k1 == 1 {
        return Ok(x);
    }
    let mut m = mat_mul(ctx, &t0, &m0)?;
    for step in 1..params.k1 {
        let t = two_minus(ctx, &m)?;
        x = mat_mul(ctx, &x, &t)?;
        if step + 1 < params.k1 {
            m = mat_mul(ctx, &t, &m)?;
        }
    }
    Ok(x)
}
