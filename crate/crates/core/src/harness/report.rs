use std::collections::BTreeSet;

use serde::Serialize;

use crate::circuits::Direction;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpRecord {
    pub index: usize,
    pub direction: Direction,
    pub k: u32,
    pub word: u64,
    pub expected: u64,
    pub observed: u64,
    pub pass: bool,
    /// Clock pulses the selected generator emitted in this window.
    pub shift_pulses: usize,
    /// Launch to the last register read or converter toggle.
    pub latency_fs: Option<u64>,
    pub latency_cycles: Option<u64>,
    /// Converter level changes per output bit.
    pub toggles: Vec<u32>,
    pub first_divergent_output: Option<String>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Aggregate {
    pub pass: bool,
    pub operations: usize,
    pub mismatches: usize,
    pub max_latency_fs: Option<u64>,
    pub max_latency_cycles: Option<u64>,
    pub divergent_outputs: Vec<String>,
    pub diagnostics: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub width: usize,
    pub master_period_fs: u64,
    pub operations: Vec<OpRecord>,
    pub aggregate: Aggregate,
}

impl RunReport {
    pub fn new(width: usize, master_period_fs: u64, mut operations: Vec<OpRecord>) -> RunReport {
        for (i, op) in operations.iter_mut().enumerate() {
            op.index = i;
        }
        let divergent: BTreeSet<String> = operations
            .iter()
            .filter_map(|o| o.first_divergent_output.clone())
            .collect();
        let aggregate = Aggregate {
            pass: operations.iter().all(|o| o.pass),
            operations: operations.len(),
            mismatches: operations.iter().filter(|o| !o.pass).count(),
            max_latency_fs: operations.iter().filter_map(|o| o.latency_fs).max(),
            max_latency_cycles: operations.iter().filter_map(|o| o.latency_cycles).max(),
            divergent_outputs: divergent.into_iter().collect(),
            diagnostics: operations.iter().map(|o| o.diagnostics.len()).sum(),
        };
        RunReport {
            width,
            master_period_fs,
            operations,
            aggregate,
        }
    }

    pub fn pass(&self) -> bool {
        self.aggregate.pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &OpRecord> {
        self.operations.iter().filter(|o| !o.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let a = &self.aggregate;
        let latency = match (a.max_latency_fs, a.max_latency_cycles) {
            (Some(fs), Some(c)) => format!("{:.1} ps ({c} master cycles)", fs as f64 / 1000.0),
            _ => "n/a".to_string(),
        };
        format!(
            "{}: {} operations, {} mismatches, max latency {latency}{}",
            if a.pass { "PASS" } else { "FAIL" },
            a.operations,
            a.mismatches,
            if a.divergent_outputs.is_empty() {
                String::new()
            } else {
                format!(", divergent outputs: {}", a.divergent_outputs.join(" "))
            }
        )
    }
}
