use he_emulator::{unmask, Ciphertext, HeContext, HeError};
use he_kernels::{
    acomp_with, depth, he_sqrt, newton_inverse, trace_compare, trace_compare_depth, ComparatorParams,
    InverseParams, KernelError, SqrtParams,
};
use packed_linalg::{
    add_matrices, add_vectors, encode_matrix, encode_vector, inner_blocks, mat_vec, outer, plain,
    quad_form, scale_vector, PackedMatrix, PackedVector,
};

use crate::config::BanditConfig;
use crate::error::HelbaError;
use crate::formulas::{
    acomp_precision, beta_tilde, eps_inverse, refresh_trace_bound, rho_max, sqrt_bounds, trace_scale,
};
use crate::telemetry::{BatchEnd, BatchTrigger, KernelCall, Reencryption, Telemetry};
use crate::user::UserLink;

/// Masking modulus and precision for re-encryption round trips.
pub const REENC_MODULUS: u64 = 1 << 53;
pub const REENC_FRAC_BITS: u32 = 36;

type Result<T> = std::result::Result<T, HelbaError>;

/// Encrypted statistics held by the server.
#[derive(Debug, Clone)]
pub struct HelbaState {
    /// lambda I + sum of x x^T over all observed steps.
    pub lambda_check: PackedMatrix,
    /// Sum of y x over all observed steps.
    pub g_check: PackedVector,
    /// Approximate inverse of the design matrix at the batch start.
    pub a_bar: PackedMatrix,
    /// Ridge estimate at the batch start, in row-constant blocks.
    pub omega: Ciphertext,
    pub t_j: usize,
    pub j: usize,
    /// Current step, starting at 1.
    pub t: usize,
    /// Sum of ||x_l||^2 under `a_bar` over the current batch.
    pub trace_acc: Option<Ciphertext>,
}

/// Ciphertexts produced while choosing an arm.
#[derive(Debug, Clone)]
pub struct Choice {
    pub beta: f64,
    pub rho: Vec<Ciphertext>,
    pub rho_hat: Vec<Ciphertext>,
    pub b: Ciphertext,
}

/// The computing party. Holds only public parameters and ciphertexts.
#[derive(Debug)]
pub struct HelbaServer {
    ctx: HeContext,
    cfg: BanditConfig,
    state: HelbaState,
    telemetry: Telemetry,
}

impl HelbaServer {
    pub fn new(ctx: HeContext, cfg: BanditConfig) -> Result<Self> {
        cfg.validate()?;
        cfg.s()?;
        let d = cfg.dim;
        let n = ctx.n_slots();
        if 2 * d * d > n || cfg.arms > n {
            return Err(HelbaError::Config(format!(
                "{n} slots cannot hold the {d}x{d} product workspace and {} arms",
                cfg.arms
            )));
        }
        if ctx.config().scale_bits < REENC_FRAC_BITS {
            return Err(HelbaError::Config(format!(
                "scale_bits {} is below the re-encryption precision {REENC_FRAC_BITS}",
                ctx.config().scale_bits
            )));
        }
        let he = |e: HeError| HelbaError::he(0, "init")(e);
        let eye = plain::identity(d);
        let scaled = |s: f64| eye.iter().map(|v| v * s).collect::<Vec<_>>();
        let state = HelbaState {
            lambda_check: encode_matrix(&ctx, &scaled(cfg.lambda), d, d).map_err(he)?,
            g_check: encode_vector(&ctx, &vec![0.0; d], d).map_err(he)?,
            a_bar: encode_matrix(&ctx, &scaled(1.0 / cfg.lambda), d, d).map_err(he)?,
            omega: ctx.encrypt(&[]).map_err(he)?,
            t_j: 1,
            j: 1,
            t: 1,
            trace_acc: None,
        };
        Ok(Self {
            ctx,
            cfg,
            state,
            telemetry: Telemetry::default(),
        })
    }

    /// Resumes from existing encrypted state.
    pub fn with_state(ctx: HeContext, cfg: BanditConfig, state: HelbaState) -> Result<Self> {
        let mut server = Self::new(ctx, cfg)?;
        if state.t_j < 1 || state.t_j > state.t {
            return Err(HelbaError::Config(format!(
                "batch start {} after current step {}",
                state.t_j, state.t
            )));
        }
        server.state = state;
        Ok(server)
    }

    pub fn state(&self) -> &HelbaState {
        &self.state
    }

    pub fn telemetry(&self) -> &Telemetry {
        &self.telemetry
    }

    pub fn config(&self) -> &BanditConfig {
        &self.cfg
    }

    pub fn context(&self) -> &HeContext {
        &self.ctx
    }

    /// Number of ridge computations so far, the initial one included.
    pub fn update_count(&self) -> usize {
        self.state.j
    }

    fn record(&mut self, kernel: &str, arm: Option<usize>, input: u32, output: &Ciphertext, predicted: u32) {
        self.telemetry.calls.push(KernelCall {
            t: self.state.t,
            kernel: kernel.to_string(),
            arm,
            input_level: input,
            output_level: output.level(),
            predicted,
        });
    }

    fn reencrypt(&mut self, cts: &[Ciphertext], kernel: &'static str, link: &mut dyn UserLink) -> Result<Vec<Ciphertext>> {
        let t = self.state.t;
        let (masked, tokens): (Vec<_>, Vec<_>) = cts
            .iter()
            .map(|ct| self.ctx.mask_with(ct, REENC_MODULUS, REENC_FRAC_BITS))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(HelbaError::he(t, kernel))?
            .into_iter()
            .unzip();
        let fresh = link.reencrypt(&masked)?;
        if fresh.len() != masked.len() {
            return Err(HelbaError::Protocol(format!(
                "step {t}: {} ciphertexts sent for re-encryption, {} returned",
                masked.len(),
                fresh.len()
            )));
        }
        let out = fresh
            .iter()
            .zip(&tokens)
            .map(|(ct, tok)| self.ctx.unmask_encrypted(ct, tok))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(HelbaError::he(t, kernel))?;
        self.telemetry.reencryptions.push(Reencryption {
            t,
            kernel: kernel.to_string(),
            ciphertexts: cts.len(),
        });
        Ok(out)
    }

    /// Returns the ciphertexts unchanged if all have `needed` levels left,
    /// otherwise re-encrypts all of them through the user.
    fn ensure(
        &mut self,
        cts: Vec<Ciphertext>,
        needed: u32,
        kernel: &'static str,
        link: &mut dyn UserLink,
    ) -> Result<Vec<Ciphertext>> {
        if cts.iter().all(|c| c.level() >= needed) {
            return Ok(cts);
        }
        let top = self.ctx.config().depth;
        if needed > top {
            return Err(HelbaError::Kernel {
                t: self.state.t,
                kernel,
                source: KernelError::He(HeError::DepthExhausted {
                    needed,
                    available: top,
                }),
            });
        }
        self.reencrypt(&cts, kernel, link)
    }

    fn ensure_one(&mut self, ct: Ciphertext, needed: u32, kernel: &'static str, link: &mut dyn UserLink) -> Result<Ciphertext> {
        Ok(self.ensure(vec![ct], needed, kernel, link)?.remove(0))
    }

    fn ensure_a_bar(&mut self, needed: u32, kernel: &'static str, link: &mut dyn UserLink) -> Result<()> {
        let a = self.state.a_bar.clone();
        self.state.a_bar.ct = self.ensure_one(a.ct, needed, kernel, link)?;
        Ok(())
    }

    /// Optimistic index rho_a = <omega, x_a> + beta (sqrt(c2) q_k0 + 1/t) for
    /// each arm, one ciphertext per arm with the index in every slot.
    pub fn compute_indexes(&mut self, xs: &[PackedVector], link: &mut dyn UserLink) -> Result<(f64, Vec<Ciphertext>)> {
        let t = self.state.t;
        if xs.len() != self.cfg.arms {
            return Err(HelbaError::Protocol(format!(
                "step {t}: {} contexts for {} arms",
                xs.len(),
                self.cfg.arms
            )));
        }
        let beta = beta_tilde(t, self.state.t_j, &self.cfg)?;
        let (c1, c2) = sqrt_bounds(self.state.t_j, &self.cfg);
        let sp = SqrtParams::new(c1, c2, 1.0 / t as f64).map_err(HelbaError::at(t, "sqrt"))?;
        let pt = self.ctx.pt_cost();
        let sqrt_depth = depth::he_sqrt(sp.k0, pt);
        self.ensure_a_bar(depth::QUAD_FORM, "quad_form", link)?;
        let omega = self.state.omega.clone();
        self.state.omega = self.ensure_one(omega, depth::INNER, "inner", link)?;
        let mut rhos = Vec::with_capacity(xs.len());
        for (a, x) in xs.iter().enumerate() {
            let he = |k| HelbaError::he(t, k);
            let a_bar = self.state.a_bar.clone();
            let quad = quad_form(&self.ctx, &a_bar, x).map_err(he("quad_form"))?;
            self.record("quad_form", Some(a), a_bar.level().min(x.level()), &quad, depth::QUAD_FORM);
            let inner = inner_blocks(&self.ctx, &self.state.omega, x).map_err(he("inner"))?;
            self.record("inner", Some(a), self.state.omega.level().min(x.level()), &inner, depth::INNER);
            let z = self.ctx.add_scalar(&quad, c1).map_err(he("sqrt"))?;
            let z = self.ensure_one(z, sqrt_depth + 2 * pt, "sqrt", link)?;
            let sq = he_sqrt(&self.ctx, &z, &sp).map_err(HelbaError::at(t, "sqrt"))?;
            self.record("sqrt", Some(a), z.level(), &sq, sqrt_depth);
            let shifted = self.ctx.add_scalar(&sq, 1.0 / t as f64).map_err(he("index_affine"))?;
            let bonus = self.ctx.mult_scalar(&shifted, beta).map_err(he("index_affine"))?;
            self.record("index_affine", Some(a), sq.level(), &bonus, pt);
            rhos.push(self.ctx.add(&inner, &bonus).map_err(he("index_affine"))?);
        }
        Ok((beta, rhos))
    }

    /// (rho - r_min) / (rho_max - r_min), a plaintext affine map.
    pub fn rescale_indexes(&mut self, rho: &Ciphertext, arm: Option<usize>, beta: f64) -> Result<Ciphertext> {
        let t = self.state.t;
        let span = rho_max(t, beta, &self.cfg) - self.cfg.r_min;
        let he = || HelbaError::he(t, "rescale");
        let shifted = self.ctx.add_scalar(rho, -self.cfg.r_min).map_err(he())?;
        let out = self.ctx.mult_scalar(&shifted, 1.0 / span).map_err(he())?;
        self.record("rescale", arm, rho.level(), &out, self.ctx.pt_cost());
        Ok(out)
    }

    /// Encrypted approximate argmax indicator of the rescaled indexes.
    pub fn select_arm(&mut self, rho_hat: Vec<Ciphertext>, link: &mut dyn UserLink) -> Result<Ciphertext> {
        let t = self.state.t;
        let params = ComparatorParams::for_list(acomp_precision(t), rho_hat.len(), self.cfg.comparator_n)
            .map_err(HelbaError::at(t, "acomp"))?;
        let predicted = depth::acomp(rho_hat.len(), params.n, params.d, params.d_prime, self.ctx.pt_cost());
        let inputs = self.ensure(rho_hat, predicted, "acomp", link)?;
        let input = inputs.iter().map(Ciphertext::level).min().unwrap_or(0);
        let b = acomp_with(&self.ctx, &inputs, &params).map_err(HelbaError::at(t, "acomp"))?;
        self.record("acomp", None, input, &b, predicted);
        Ok(b)
    }

    /// Indexes, rescaling and argmax for the current step.
    pub fn choose(&mut self, xs: &[PackedVector], link: &mut dyn UserLink) -> Result<Choice> {
        let (beta, rho) = self.compute_indexes(xs, link)?;
        let rho_hat = rho
            .iter()
            .enumerate()
            .map(|(a, r)| self.rescale_indexes(r, Some(a), beta))
            .collect::<Result<Vec<_>>>()?;
        let b = self.select_arm(rho_hat.clone(), link)?;
        Ok(Choice { beta, rho, rho_hat, b })
    }

    /// Adds the chosen context and its reward to the running statistics and
    /// to the batch trace.
    pub fn observe(&mut self, x: &PackedVector, y: &Ciphertext, link: &mut dyn UserLink) -> Result<()> {
        let t = self.state.t;
        let he = |k| HelbaError::he(t, k);
        let xx = outer(&self.ctx, x).map_err(he("outer"))?;
        self.record("outer", None, x.level(), &xx.ct, 1);
        self.state.lambda_check = add_matrices(&self.ctx, &self.state.lambda_check, &xx).map_err(he("outer"))?;
        let yx = scale_vector(&self.ctx, x, y).map_err(he("scale_vector"))?;
        self.record("scale_vector", None, x.level().min(y.level()), &yx.ct, 1);
        self.state.g_check = add_vectors(&self.ctx, &self.state.g_check, &yx).map_err(he("scale_vector"))?;
        self.ensure_a_bar(depth::QUAD_FORM, "trace_quad", link)?;
        let q = quad_form(&self.ctx, &self.state.a_bar, x).map_err(he("trace_quad"))?;
        self.record("trace_quad", None, self.state.a_bar.level().min(x.level()), &q, depth::QUAD_FORM);
        self.state.trace_acc = Some(match self.state.trace_acc.take() {
            None => q,
            Some(acc) => self.ctx.add(&acc, &q).map_err(he("trace_quad"))?,
        });
        Ok(())
    }

    /// Batch-end test at the end of the current step. The geometric rule is
    /// checked in the clear; the trace rule runs encrypted and only the
    /// masked comparison bit is opened by the user.
    pub fn check_batch_end(&mut self, link: &mut dyn UserLink) -> Result<Option<BatchTrigger>> {
        let t = self.state.t;
        let t_j = self.state.t_j;
        if t as f64 >= (1.0 + self.cfg.eta) * t_j as f64 {
            return Ok(Some(BatchTrigger::Geometric));
        }
        let Some(acc) = self.state.trace_acc.take() else {
            return Ok(None);
        };
        let thr = self.cfg.delta_threshold;
        let scale = trace_scale(t + 1 - t_j, &self.cfg);
        let eps_prime = 1.0 / (4.0 * t as f64 * scale);
        let d5 = trace_compare_depth(thr, eps_prime).map_err(HelbaError::at(t, "trace_compare"))?;
        let predicted = depth::trace_compare(1, d5, self.ctx.pt_cost());
        let acc = self.ensure_one(acc, predicted, "trace_compare", link)?;
        self.state.trace_acc = Some(acc.clone());
        let delta = trace_compare(&self.ctx, &acc, self.cfg.c_trace, scale, thr, d5)
            .map_err(HelbaError::at(t, "trace_compare"))?;
        self.record("trace_compare", None, acc.level(), &delta, predicted);
        let (masked, tok) = self.ctx.mask(&delta).map_err(HelbaError::he(t, "trace_compare"))?;
        let residues = link.open_masked(&masked)?;
        if residues.len() != tok.offsets.len() {
            return Err(HelbaError::Protocol(format!("step {t}: malformed masked reply")));
        }
        let value = unmask(&residues, &tok)[0];
        self.telemetry.trace_checks.push((t, value));
        Ok((value >= thr).then_some(BatchTrigger::Trace))
    }

    /// Starts a new batch at t + 1: inverts the accumulated design matrix and
    /// recomputes the ridge estimate.
    pub fn refresh(&mut self, link: &mut dyn UserLink) -> Result<()> {
        let t = self.state.t;
        let t_next = t + 1;
        let params = InverseParams::new(
            refresh_trace_bound(t_next, &self.cfg),
            self.cfg.lambda,
            eps_inverse(t_next, &self.cfg),
        )
        .map_err(HelbaError::at(t, "newton_inverse"))?;
        let predicted = depth::newton_inverse(params.k1, self.ctx.pt_cost());
        let v = self.state.lambda_check.clone();
        let v = PackedMatrix {
            ct: self.ensure_one(v.ct, predicted + depth::MAT_VEC, "newton_inverse", link)?,
            ..v
        };
        let a_bar = newton_inverse(&self.ctx, &v, &params).map_err(HelbaError::at(t, "newton_inverse"))?;
        self.record("newton_inverse", None, v.level(), &a_bar.ct, predicted);
        let g = self.state.g_check.clone();
        let g = PackedVector {
            ct: self.ensure_one(g.ct, depth::MAT_VEC, "mat_vec", link)?,
            ..g
        };
        let omega = mat_vec(&self.ctx, &a_bar, &g).map_err(HelbaError::he(t, "mat_vec"))?;
        self.record("mat_vec", None, a_bar.level().min(g.level()), &omega, depth::MAT_VEC);
        self.state.a_bar = a_bar;
        self.state.omega = omega;
        self.state.t_j = t_next;
        self.state.j += 1;
        self.state.trace_acc = None;
        Ok(())
    }

    /// Closes the current step: batch test and refresh (skipped after the
    /// final step), then advances t.
    pub fn end_step(&mut self, link: &mut dyn UserLink) -> Result<Option<BatchTrigger>> {
        let t = self.state.t;
        let trigger = if t < self.cfg.horizon {
            self.check_batch_end(link)?
        } else {
            None
        };
        if let Some(trigger) = trigger {
            self.telemetry.batch_ends.push(BatchEnd { t, trigger });
            self.refresh(link)?;
        }
        self.state.t += 1;
        Ok(trigger)
    }
}
