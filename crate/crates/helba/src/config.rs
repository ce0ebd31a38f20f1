use serde::{Deserialize, Serialize};

use crate::error::HelbaError;

/// Which design-matrix term enters the confidence radius:
/// ln(1 + L^2 t/(lambda d)) or ln(1 + L^2 t/lambda).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BetaVariant {
    #[default]
    LambdaD,
    Lambda,
}

/// Problem and algorithm constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BanditConfig {
    /// Horizon T.
    pub horizon: usize,
    /// Number of arms K.
    pub arms: usize,
    /// Feature dimension d.
    pub dim: usize,
    /// Ridge regularization lambda.
    pub lambda: f64,
    /// Failure probability delta.
    pub delta: f64,
    /// Bound L on feature norms (L >= 1).
    pub l_bound: f64,
    /// Bound S on the parameter norm; `None` lets the environment supply it.
    pub s_bound: Option<f64>,
    /// Reward noise scale sigma.
    pub sigma: f64,
    /// Trace threshold C.
    pub c_trace: f64,
    /// Batch growth eta.
    pub eta: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub beta_variant: BetaVariant,
    /// Comparator polynomial family index n.
    pub comparator_n: u32,
    /// Decision threshold applied to the masked trace comparison.
    pub delta_threshold: f64,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            horizon: 130,
            arms: 2,
            dim: 2,
            lambda: 1.0,
            delta: 0.05,
            l_bound: 5.5,
            s_bound: None,
            sigma: 0.5,
            c_trace: 1.0,
            eta: 0.1,
            r_min: -1.0,
            r_max: 1.0,
            beta_variant: BetaVariant::LambdaD,
            comparator_n: 1,
            delta_threshold: 0.45,
        }
    }
}

impl BanditConfig {
    /// Checks hard constraints and returns warnings for soft ones.
    pub fn validate(&self) -> Result<Vec<String>, HelbaError> {
        let fail = |m: String| Err(HelbaError::Config(m));
        if self.horizon == 0 || self.arms == 0 || self.dim == 0 {
            return fail("horizon, arms and dim must be positive".into());
        }
        if !(self.lambda > 0.0) {
            return fail(format!("lambda = {} must be positive", self.lambda));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta = {} must lie in (0, 1)", self.delta));
        }
        if !(self.l_bound >= 1.0) {
            return fail(format!("L = {} must be at least 1", self.l_bound));
        }
        if let Some(s) = self.s_bound {
            if !(s >= 0.0) {
                return fail(format!("S = {s} must be nonnegative"));
            }
        }
        if !(self.sigma >= 0.0) || !(self.c_trace >= 0.0) || !(self.eta > 0.0) {
            return fail("sigma, C must be >= 0 and eta > 0".into());
        }
        if !(self.r_min < self.r_max) {
            return fail("r_min must be below r_max".into());
        }
        if self.comparator_n == 0 {
            return fail("comparator_n must be >= 1".into());
        }
        if !(self.delta_threshold > 0.0 && self.delta_threshold < 0.5) {
            return fail("delta_threshold must lie in (0, 1/2)".into());
        }
        let mut warnings = Vec::new();
        let h = self.batch_hypothesis_margin();
        if h <= 0.25 {
            warnings.push(format!(
                "C - L eta / sqrt(lambda + L^2) = {h:.4} is not above 1/4; the batch-count bound does not apply"
            ));
        }
        Ok(warnings)
    }

    pub fn s(&self) -> Result<f64, HelbaError> {
        self.s_bound
            .ok_or_else(|| HelbaError::Config("parameter norm bound S is not set".into()))
    }

    /// C - L eta / sqrt(lambda + L^2); the batch bound needs it above 1/4.
    pub fn batch_hypothesis_margin(&self) -> f64 {
        self.c_trace - self.l_bound * self.eta / (self.lambda + self.l_bound.powi(2)).sqrt()
    }

    /// Upper bound on the number of batches over the horizon:
    /// 1 + d ln(1 + L^2 T/(lambda d)) / (2 ln(3/4 + C - L eta/sqrt(lambda + L^2)))
    /// + ln T / ln(1 + eta).
    pub fn batch_bound(&self) -> f64 {
        let d = self.dim as f64;
        let t = self.horizon as f64;
        let info = d * (1.0 + self.l_bound.powi(2) * t / (self.lambda * d)).ln();
        let growth = 2.0 * (0.75 + self.batch_hypothesis_margin()).ln();
        1.0 + info / growth + t.ln() / (1.0 + self.eta).ln()
    }
}
