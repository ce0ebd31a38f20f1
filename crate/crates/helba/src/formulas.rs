//! Plain scalar quantities used by the encrypted pipeline.

use crate::config::{BanditConfig, BetaVariant};
use crate::error::HelbaError;

fn log_terms(t_design: f64, t: f64, cfg: &BanditConfig) -> f64 {
    let d = cfg.dim as f64;
    let denom = match cfg.beta_variant {
        BetaVariant::LambdaD => cfg.lambda * d,
        BetaVariant::Lambda => cfg.lambda,
    };
    let design = (1.0 + cfg.l_bound.powi(2) * t_design / denom).ln();
    let union = (std::f64::consts::PI.powi(2) * t * t / (6.0 * cfg.delta)).ln();
    cfg.sigma * (d * (design + union)).sqrt()
}

/// Inflated confidence radius at step `t` for a batch started at `t_j`:
/// t_j^{-1/2} + S sqrt(lambda) + sigma sqrt(d (ln(1 + L^2 t_j/(lambda d)) + ln(pi^2 t^2/(6 delta)))).
pub fn beta_tilde(t: usize, t_j: usize, cfg: &BanditConfig) -> Result<f64, HelbaError> {
    if t_j < 1 || t_j > t {
        return Err(HelbaError::Config(format!("need 1 <= t_j ({t_j}) <= t ({t})")));
    }
    Ok((t_j as f64).powf(-0.5) + beta_plain(t_j, t, cfg)?)
}

/// Radius without the encryption term: S sqrt(lambda) + sigma sqrt(...), with
/// the design term evaluated at `t_design` and the union term at `t`.
pub fn beta_plain(t_design: usize, t: usize, cfg: &BanditConfig) -> Result<f64, HelbaError> {
    let t_design = t_design.max(1) as f64;
    Ok(cfg.s()? * cfg.lambda.sqrt() + log_terms(t_design, t.max(1) as f64, cfg))
}

/// Precision of the encrypted inverse for a batch starting at `t`:
/// 1 / (L t^{3/2} sqrt(lambda + L^2 t)).
pub fn eps_inverse(t: usize, cfg: &BanditConfig) -> f64 {
    let t = t as f64;
    1.0 / (cfg.l_bound * t.powf(1.5) * (cfg.lambda + cfg.l_bound.powi(2) * t).sqrt())
}

/// eps_j = L / (t_j^{3/2} sqrt(lambda + L^2 t_j)), the shift added under the
/// square root.
pub fn eps_j(t_j: usize, cfg: &BanditConfig) -> f64 {
    cfg.l_bound.powi(2) * eps_inverse(t_j, cfg)
}

/// L^2 (1/lambda + 1/sqrt(lambda)), the largest possible ||x||^2 under the
/// approximate inverse.
pub fn norm_cap(cfg: &BanditConfig) -> f64 {
    cfg.l_bound.powi(2) * (1.0 / cfg.lambda + 1.0 / cfg.lambda.sqrt())
}

/// Square-root input bounds (c1, c2) for a batch started at `t_j`.
pub fn sqrt_bounds(t_j: usize, cfg: &BanditConfig) -> (f64, f64) {
    let c1 = eps_j(t_j, cfg);
    let c2 = c1 + cfg.l_bound.powi(2) / cfg.lambda.sqrt() * (1.0 + 1.0 / cfg.lambda.sqrt());
    (c1, c2)
}

fn bracket(t: usize, cfg: &BanditConfig) -> f64 {
    let tf = t as f64;
    2.0 / tf
        + cfg.l_bound * (1.0 / cfg.lambda + 1.0 / cfg.lambda.sqrt()).sqrt()
        + (cfg.l_bound / (tf.powf(1.5) * (cfg.lambda + cfg.l_bound.powi(2) * tf).sqrt())).sqrt()
}

/// Upper end of the index range: r_max + 2 beta [2/t + L sqrt(1/lambda + 1/sqrt(lambda))
/// + sqrt(L / (t^{3/2} sqrt(lambda + L^2 t)))].
pub fn rho_max(t: usize, beta: f64, cfg: &BanditConfig) -> f64 {
    cfg.r_max + 2.0 * beta * bracket(t, cfg)
}

/// Index gap allowed for an arm that clears the user's threshold:
/// 1/t + (beta/t) [2/t + sqrt(L/(t^{3/2} sqrt(lambda + L^2 t))) + L sqrt(1/lambda + 1/sqrt(lambda))].
pub fn selection_slack(t: usize, beta: f64, cfg: &BanditConfig) -> f64 {
    let tf = t as f64;
    1.0 / tf + beta / tf * bracket(t, cfg)
}

/// Precision of the encrypted argmax at step t.
pub fn acomp_precision(t: usize) -> f64 {
    1.0 / (4.1 * t as f64)
}

/// Threshold the user applies to the decrypted comparison vector.
pub fn selection_threshold(t: usize) -> f64 {
    1.0 / (4.0 * t as f64)
}

/// Normalizer of the batch trace: L^2 (1/lambda + 1/sqrt(lambda)) n.
pub fn trace_scale(samples: usize, cfg: &BanditConfig) -> f64 {
    norm_cap(cfg) * samples as f64
}

/// Trace upper bound used to start the inverse iteration for a batch
/// starting at `t_next`: lambda d + L^2 t_next.
pub fn refresh_trace_bound(t_next: usize, cfg: &BanditConfig) -> f64 {
    cfg.lambda * cfg.dim as f64 + cfg.l_bound.powi(2) * t_next as f64
}
