use std::collections::BTreeMap;
use std::time::Instant;

use baselines::{BaselineKind, LinUcb};
use he_emulator::{BackendConfig, HeContext};
use helba::{play_step, BanditConfig, HelbaServer, HelbaUser};
use serde::{Deserialize, Serialize};

use crate::config::AlgoId;
use crate::env::Environment;
use crate::error::Result;

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub run_id: String,
    pub algo: String,
    pub t: usize,
    pub arm: usize,
    pub regret_step: f64,
    pub regret_cum: f64,
    pub updated: bool,
    pub depth_used: u32,
}

pub const CSV_HEADER: [&str; 8] = [
    "run_id",
    "algo",
    "t",
    "arm",
    "regret_step",
    "regret_cum",
    "updated",
    "depth_used",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTelemetry {
    pub max_kernel_depth: u32,
    pub max_step_depth: u32,
    pub kernel_calls: BTreeMap<String, usize>,
    pub reencryptions: usize,
    pub depth_mismatches: usize,
    pub trace_triggers: usize,
    pub geometric_triggers: usize,
    /// Wall time of the episode; the only nondeterministic field.
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub run_id: String,
    pub algo: AlgoId,
    pub seed: u64,
    pub rows: Vec<StepRow>,
    /// Number of policy computations, the initial one included.
    pub update_count: usize,
    /// Steps after which the policy was recomputed.
    pub updates: Vec<usize>,
    pub warnings: Vec<String>,
    pub telemetry: RunTelemetry,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.regret_cum)
    }

    pub fn regret_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.rows[t - 1].regret_cum
        }
    }
}

pub fn run_id(algo: AlgoId, seed: u64) -> String {
    format!("{}-{seed}", algo.name())
}

/// Fills S from the environment when the configuration leaves it open.
pub fn resolve(cfg: &BanditConfig, env: &Environment) -> BanditConfig {
    let mut cfg = cfg.clone();
    if cfg.s_bound.is_none() {
        cfg.s_bound = Some(env.theta_norm());
    }
    cfg
}

struct Recorder {
    run_id: String,
    algo: AlgoId,
    cum: f64,
    rows: Vec<StepRow>,
}

impl Recorder {
    fn push(&mut self, env: &Environment, t: usize, arm: usize, updated: bool, depth_used: u32) {
        let regret_step = env.instant_regret(t, arm);
        self.cum += regret_step;
        self.rows.push(StepRow {
            run_id: self.run_id.clone(),
            algo: self.algo.name().to_string(),
            t,
            arm,
            regret_step,
            regret_cum: self.cum,
            updated,
            depth_used,
        });
    }
}

/// Plays one episode. HELBA runs the two-party protocol on an emulated
/// backend seeded by `seed`; baselines run in the clear.
pub fn run_episode(
    algo: AlgoId,
    env: &Environment,
    cfg: &BanditConfig,
    backend: &BackendConfig,
    seed: u64,
) -> Result<RegretTrace> {
    let start = Instant::now();
    let cfg = resolve(cfg, env);
    let warnings = cfg.validate()?;
    if env.context_pool.iter().any(|set| set.len() != cfg.arms) {
        return Err(crate::HarnessError::Config(format!(
            "environment context sets do not have {} arms",
            cfg.arms
        )));
    }
    let mut rec = Recorder {
        run_id: run_id(algo, seed),
        algo,
        cum: 0.0,
        rows: Vec::with_capacity(cfg.horizon),
    };
    let mut noise = env.noise();
    let mut updates = Vec::new();
    let mut telemetry = RunTelemetry::default();
    let update_count = match algo {
        AlgoId::Helba => {
            let (ctx, sk) = HeContext::with_key(backend.clone()).map_err(helba_init)?;
            let mut user = HelbaUser::new(ctx.fork(seed ^ 0x7573_6572), sk, cfg.dim, cfg.arms);
            let mut server = HelbaServer::new(ctx, cfg.clone())?;
            for t in 1..=cfg.horizon {
                let ctxs = env.contexts(t);
                let rep = play_step(&mut server, &mut user, ctxs, |a| noise.reward(env.mean_reward(&ctxs[a])))?;
                if rep.batch_end.is_some() {
                    updates.push(t);
                }
                rec.push(env, t, rep.arm, rep.batch_end.is_some(), rep.depth_used);
            }
            let tel = server.telemetry();
            telemetry.max_kernel_depth = tel.max_kernel_depth();
            telemetry.max_step_depth = rec.rows.iter().map(|r| r.depth_used).max().unwrap_or(0);
            telemetry.kernel_calls = tel.kernel_counts();
            telemetry.reencryptions = tel.reencryption_rounds();
            telemetry.depth_mismatches = tel.mismatches().count();
            telemetry.trace_triggers = tel
                .batch_ends
                .iter()
                .filter(|b| b.trigger == helba::BatchTrigger::Trace)
                .count();
            telemetry.geometric_triggers = tel.batch_ends.len() - telemetry.trace_triggers;
            server.update_count()
        }
        _ => {
            let kind = match algo {
                AlgoId::Oful => BaselineKind::Oful,
                AlgoId::Rsoful => BaselineKind::Rsoful,
                _ => BaselineKind::RsofulTr,
            };
            let mut alg = LinUcb::new(kind, cfg.clone())?;
            for t in 1..=cfg.horizon {
                let ctxs = env.contexts(t);
                let arm = alg.choose(t, ctxs);
                let r = noise.reward(env.mean_reward(&ctxs[arm]));
                let updated = alg.observe(t, &ctxs[arm], r);
                if updated {
                    updates.push(t);
                }
                rec.push(env, t, arm, updated, 0);
            }
            alg.update_count()
        }
    };
    telemetry.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(RegretTrace {
        run_id: rec.run_id,
        algo,
        seed,
        rows: rec.rows,
        update_count,
        updates,
        warnings,
        telemetry,
    })
}

fn helba_init(e: he_emulator::HeError) -> helba::HelbaError {
    helba::HelbaError::Config(format!("backend: {e}"))
}
