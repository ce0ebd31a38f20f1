use he_emulator::{Ciphertext, HeContext};

use crate::error::{invalid, Result};
use crate::params::SqrtParams;

/// sqrt(c2) q_{k0} with q_0 = z/c2, v_0 = q_0 - 1,
/// q_{k+1} = q_k (1 - v_k/2), v_{k+1} = v_k^2 (v_k - 3)/4.
pub fn he_sqrt(ctx: &HeContext, z: &Ciphertext, params: &SqrtParams) -> Result<Ciphertext> {
    if !(params.c1 > 0.0 && params.c1 <= params.c2) {
        return invalid(format!("need 0 < c1 <= c2, got {} and {}", params.c1, params.c2));
    }
    let mut q = ctx.mult_scalar(z, 1.0 / params.c2)?;
    let mut v = ctx.add_scalar(&q, -1.0)?;
    for step in 0..params.k0 {
        let half = ctx.add_scalar(&ctx.mult_scalar(&v, -0.5)?, 1.0)?;
        let next_q = ctx.mult_ct(&q, &half)?;
        if step + 1 < params.k0 {
            let sq = ctx.mult_ct(&v, &v)?;
            let shifted = ctx.add_scalar(&ctx.mult_scalar(&v, 0.25)?, -0.75)?;
            v = ctx.mult_ct(&sq, &shifted)?;
        }
        q = next_q;
    }
    Ok(ctx.mult_scalar(&q, params.c2.sqrt())?)
}
