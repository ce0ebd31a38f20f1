//! Experiment driver: environments with cycled random contexts, episodes of
//! HELBA (as a two-party protocol over the emulated backend) and of the
//! plaintext baselines, regret accounting, parallel suites and CSV/JSON
//! output.

// Negated comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod env;
mod episode;
mod error;
mod suite;

pub use config::{AlgoId, BackendKind, ExperimentConfig};
pub use env::{ball_point, dot, Environment, RewardNoise};
pub use episode::{resolve, run_episode, run_id, RegretTrace, RunTelemetry, StepRow, CSV_HEADER};
pub use error::{HarnessError, Result};
pub use suite::{run_suite, write_outputs, AggregateRow, AlgoSummary, Emit, SuiteResult, AGGREGATE_HEADER};
