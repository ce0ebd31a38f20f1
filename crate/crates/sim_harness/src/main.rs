use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use sim_harness::{run_suite, write_outputs, AlgoId, BackendKind, Emit, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum AlgoArg {
    Helba,
    Oful,
    Rsoful,
    RsofulTr,
    All,
}

/// Runs bandit experiments and writes per-run traces and an aggregate.
#[derive(Debug, Parser)]
#[command(name = "sim-harness", version)]
struct Cli {
    /// Experiment file (TOML or JSON). Defaults to the toy configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    /// Number of seeds (repetitions).
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    #[arg(long, value_enum, default_value = "csv")]
    emit: Emit,
}

fn run(cli: Cli) -> anyhow::Result<serde_json::Value> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(a) = cli.algo {
        cfg.algos = match a {
            AlgoArg::All => AlgoId::ALL.to_vec(),
            AlgoArg::Helba => vec![AlgoId::Helba],
            AlgoArg::Oful => vec![AlgoId::Oful],
            AlgoArg::Rsoful => vec![AlgoId::Rsoful],
            AlgoArg::RsofulTr => vec![AlgoId::RsofulTr],
        };
    }
    if let Some(n) = cli.seeds {
        cfg.seeds = n;
    }
    if let Some(b) = cli.backend {
        cfg.backend_kind = b;
    }
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    let res = run_suite(&cfg)?;
    let files = write_outputs(&res, &cli.out, cli.emit)?;
    Ok(serde_json::json!({
        "files": files.len(),
        "out": cli.out,
        "summary": res.summary,
    }))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("serializable summary"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("{}", serde_json::json!({ "error": chain.join(": ") }));
            ExitCode::from(2)
        }
    }
}
