use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One kernel invocation with its predicted and measured level consumption.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelCall {
    pub t: usize,
    pub kernel: String,
    pub arm: Option<usize>,
    pub input_level: u32,
    pub output_level: u32,
    pub predicted: u32,
}

impl KernelCall {
    pub fn measured(&self) -> u32 {
        self.input_level - self.output_level
    }
}

/// One masked re-encryption round trip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reencryption {
    pub t: usize,
    pub kernel: String,
    pub ciphertexts: usize,
}

/// Why a batch ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchTrigger {
    Trace,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchEnd {
    pub t: usize,
    pub trigger: BatchTrigger,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub calls: Vec<KernelCall>,
    pub reencryptions: Vec<Reencryption>,
    pub batch_ends: Vec<BatchEnd>,
    /// Masked trace values opened by the user, as (t, delta).
    pub trace_checks: Vec<(usize, f64)>,
}

impl Telemetry {
    /// Kernel calls whose measured depth differs from the prediction.
    pub fn mismatches(&self) -> impl Iterator<Item = &KernelCall> {
        self.calls.iter().filter(|c| c.measured() != c.predicted)
    }

    /// Levels a step would need without re-encryption: the sum over kernels
    /// run in step `t` of the deepest invocation of each.
    pub fn depth_used(&self, t: usize) -> u32 {
        let mut per_kernel: BTreeMap<&str, u32> = BTreeMap::new();
        for c in self.calls.iter().filter(|c| c.t == t) {
            let e = per_kernel.entry(&c.kernel).or_default();
            *e = (*e).max(c.measured());
        }
        per_kernel.values().sum()
    }

    pub fn reencryption_rounds(&self) -> usize {
        self.reencryptions.len()
    }

    /// Largest measured depth of any single kernel call.
    pub fn max_kernel_depth(&self) -> u32 {
        self.calls.iter().map(KernelCall::measured).max().unwrap_or(0)
    }

    pub fn kernel_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for c in &self.calls {
            *m.entry(c.kernel.clone()).or_default() += 1;
        }
        m
    }
}
