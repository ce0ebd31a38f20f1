//! Plaintext optimistic linear bandits: OFUL, which recomputes the ridge
//! estimate every step, and two rarely switching variants that recompute
//! only when the design matrix has grown enough, measured by its
//! determinant (RSOFUL) or by the accumulated trace condition (RSOFUL-Tr).

use helba::formulas::beta_plain;
use helba::{BanditConfig, HelbaError};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    Oful,
    Rsoful,
    RsofulTr,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Oful => "oful",
            Self::Rsoful => "rsoful",
            Self::RsofulTr => "rsoful-tr",
        }
    }
}

/// Running ridge statistics and the estimate frozen at the last update.
#[derive(Debug, Clone)]
pub struct PlainLinUcbState {
    /// lambda I + sum of s s^T.
    pub v: DMatrix<f64>,
    /// Sum of r s.
    pub b: DVector<f64>,
    pub theta_hat: DVector<f64>,
    /// Design matrix and inverse at the last update.
    pub v_bar: DMatrix<f64>,
    pub v_bar_inv: DMatrix<f64>,
    /// Step after which the last update ran (0 for the initial one).
    pub t_last_update: usize,
    pub update_count: usize,
    /// Sum of ||s||^2 under `v_bar_inv` since the last update.
    pub trace_acc: f64,
}

#[derive(Debug, Clone)]
pub struct LinUcb {
    kind: BaselineKind,
    cfg: BanditConfig,
    state: PlainLinUcbState,
}

impl LinUcb {
    pub fn new(kind: BaselineKind, cfg: BanditConfig) -> Result<Self, HelbaError> {
        cfg.validate()?;
        cfg.s()?;
        let d = cfg.dim;
        let v = DMatrix::identity(d, d) * cfg.lambda;
        let v_inv = DMatrix::identity(d, d) / cfg.lambda;
        Ok(Self {
            kind,
            state: PlainLinUcbState {
                v: v.clone(),
                b: DVector::zeros(d),
                theta_hat: DVector::zeros(d),
                v_bar: v,
                v_bar_inv: v_inv,
                t_last_update: 0,
                update_count: 1,
                trace_acc: 0.0,
            },
            cfg,
        })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn state(&self) -> &PlainLinUcbState {
        &self.state
    }

    pub fn update_count(&self) -> usize {
        self.state.update_count
    }

    /// Confidence radius at step t: design term at the current step for
    /// OFUL, at the last update for the rarely switching variants.
    pub fn beta(&self, t: usize) -> f64 {
        let design = match self.kind {
            BaselineKind::Oful => t,
            _ => self.state.t_last_update + 1,
        };
        beta_plain(design, t, &self.cfg).expect("S checked at construction")
    }

    /// <theta_hat, s> + beta ||s||_{V_bar^{-1}}.
    pub fn index(&self, t: usize, s: &[f64]) -> f64 {
        let s = DVector::from_column_slice(s);
        let width = (s.transpose() * &self.state.v_bar_inv * &s)[(0, 0)].max(0.0).sqrt();
        self.state.theta_hat.dot(&s) + self.beta(t) * width
    }

    /// Arm with the largest index, ties to the lowest index.
    pub fn choose(&self, t: usize, contexts: &[Vec<f64>]) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for (a, s) in contexts.iter().enumerate() {
            let v = self.index(t, s);
            if v > best_val {
                best = a;
                best_val = v;
            }
        }
        best
    }

    /// Adds the observation of step t and recomputes the estimate if the
    /// switching rule fires. Returns whether it did. No update follows the
    /// final step.
    pub fn observe(&mut self, t: usize, s: &[f64], r: f64) -> bool {
        let st = &mut self.state;
        let x = DVector::from_column_slice(s);
        st.v += &x * x.transpose();
        st.b += &x * r;
        st.trace_acc += (x.transpose() * &st.v_bar_inv * &x)[(0, 0)];
        if t >= self.cfg.horizon {
            return false;
        }
        let c = self.cfg.c_trace;
        let fire = match self.kind {
            BaselineKind::Oful => true,
            BaselineKind::Rsoful => st.v.determinant() >= (1.0 + c) * st.v_bar.determinant(),
            BaselineKind::RsofulTr => st.trace_acc >= c,
        };
        if fire {
            let inv = st
                .v
                .clone()
                .cholesky()
                .expect("design matrix is positive definite")
                .inverse();
            st.theta_hat = &inv * &st.b;
            st.v_bar = st.v.clone();
            st.v_bar_inv = inv;
            st.t_last_update = t;
            st.update_count += 1;
            st.trace_acc = 0.0;
        }
        fire
    }
}
