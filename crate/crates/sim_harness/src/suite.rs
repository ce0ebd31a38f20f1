use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{AlgoId, ExperimentConfig};
use crate::env::Environment;
use crate::episode::{run_episode, RegretTrace, StepRow, CSV_HEADER};
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    #[default]
    Csv,
    Json,
}

/// Mean and standard deviation of cumulative regret per algorithm and step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algo: String,
    pub t: usize,
    pub runs: usize,
    pub regret_mean: f64,
    pub regret_std: f64,
}

pub const AGGREGATE_HEADER: [&str; 5] = ["algo", "t", "runs", "regret_mean", "regret_std"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub algo: String,
    pub runs: usize,
    pub updates_mean: f64,
    pub updates_std: f64,
    pub updates_max: usize,
    pub final_regret_mean: f64,
    pub final_regret_std: f64,
    pub half_regret_mean: f64,
    pub reencryptions_mean: f64,
    pub depth_mismatches: usize,
    pub max_kernel_depth: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub traces: Vec<RegretTrace>,
    pub aggregate: Vec<AggregateRow>,
    pub summary: Vec<AlgoSummary>,
}

impl SuiteResult {
    pub fn summary_for(&self, algo: AlgoId) -> Option<&AlgoSummary> {
        self.summary.iter().find(|s| s.algo == algo.name())
    }

    pub fn traces_for(&self, algo: AlgoId) -> impl Iterator<Item = &RegretTrace> {
        self.traces.iter().filter(move |t| t.algo == algo)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Runs every (algorithm, seed) pair in parallel. Each seed defines one
/// environment shared by all algorithms; results come back in a fixed order.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<SuiteResult> {
    cfg.validate()?;
    let b = &cfg.bandit;
    let seeds: Vec<u64> = (0..cfg.seeds as u64).map(|i| cfg.first_seed + i).collect();
    let envs = seeds
        .iter()
        .map(|&s| Environment::generate(b.dim, b.arms, cfg.pool_size, b.l_bound, b.sigma, s))
        .collect::<Result<Vec<_>>>()?;
    let mut algos = cfg.algos.clone();
    algos.sort();
    algos.dedup();
    let jobs: Vec<(AlgoId, usize)> = algos
        .iter()
        .flat_map(|&a| (0..seeds.len()).map(move |i| (a, i)))
        .collect();
    let traces = jobs
        .par_iter()
        .map(|&(a, i)| run_episode(a, &envs[i], b, &cfg.backend_for(seeds[i]), seeds[i]))
        .collect::<Result<Vec<_>>>()?;
    let mut aggregate = Vec::new();
    let mut summary = Vec::new();
    for &algo in &algos {
        let runs: Vec<&RegretTrace> = traces.iter().filter(|t| t.algo == algo).collect();
        if runs.is_empty() {
            continue;
        }
        for t in 1..=b.horizon {
            let vals: Vec<f64> = runs.iter().map(|r| r.regret_at(t)).collect();
            let (m, s) = mean_std(&vals);
            aggregate.push(AggregateRow {
                algo: algo.name().to_string(),
                t,
                runs: runs.len(),
                regret_mean: m,
                regret_std: s,
            });
        }
        let updates: Vec<f64> = runs.iter().map(|r| r.update_count as f64).collect();
        let finals: Vec<f64> = runs.iter().map(|r| r.final_regret()).collect();
        let halves: Vec<f64> = runs.iter().map(|r| r.regret_at(b.horizon / 2)).collect();
        let reenc: Vec<f64> = runs.iter().map(|r| r.telemetry.reencryptions as f64).collect();
        let (um, us) = mean_std(&updates);
        let (fm, fs) = mean_std(&finals);
        summary.push(AlgoSummary {
            algo: algo.name().to_string(),
            runs: runs.len(),
            updates_mean: um,
            updates_std: us,
            updates_max: runs.iter().map(|r| r.update_count).max().unwrap_or(0),
            final_regret_mean: fm,
            final_regret_std: fs,
            half_regret_mean: mean_std(&halves).0,
            reencryptions_mean: mean_std(&reenc).0,
            depth_mismatches: runs.iter().map(|r| r.telemetry.depth_mismatches).sum(),
            max_kernel_depth: runs.iter().map(|r| r.telemetry.max_kernel_depth).max().unwrap_or(0),
        });
    }
    Ok(SuiteResult {
        traces,
        aggregate,
        summary,
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.12}")
}

fn write_rows(path: &Path, rows: &[StepRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.run_id.clone(),
            r.algo.clone(),
            r.t.to_string(),
            r.arm.to_string(),
            fmt(r.regret_step),
            fmt(r.regret_cum),
            r.updated.to_string(),
            r.depth_used.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.algo.clone(),
            r.t.to_string(),
            r.runs.to_string(),
            fmt(r.regret_mean),
            fmt(r.regret_std),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct AggregateJson<'a> {
    aggregate: &'a [AggregateRow],
    summary: &'a [AlgoSummary],
}

/// Writes one file per run plus one aggregate file into `dir`.
pub fn write_outputs(res: &SuiteResult, dir: &Path, emit: Emit) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for tr in &res.traces {
        let p = match emit {
            Emit::Csv => {
                let p = dir.join(format!("{}.csv", tr.run_id));
                write_rows(&p, &tr.rows)?;
                p
            }
            Emit::Json => {
                let p = dir.join(format!("{}.json", tr.run_id));
                std::fs::write(&p, serde_json::to_string_pretty(tr)?)?;
                p
            }
        };
        paths.push(p);
    }
    let p = match emit {
        Emit::Csv => {
            let p = dir.join("aggregate.csv");
            write_aggregate(&p, &res.aggregate)?;
            p
        }
        Emit::Json => {
            let p = dir.join("aggregate.json");
            let body = AggregateJson {
                aggregate: &res.aggregate,
                summary: &res.summary,
            };
            std::fs::write(&p, serde_json::to_string_pretty(&body)?)?;
            p
        }
    };
    paths.push(p);
    if paths.iter().any(|p| p.file_name().is_none()) {
        return Err(HarnessError::Config("output path without a file name".into()));
    }
    Ok(paths)
}
