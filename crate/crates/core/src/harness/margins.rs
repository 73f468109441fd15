use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuits::{build_shifter, ShifterConfig};
use crate::netlist::Design;

use super::patterns::{exhaustive_operations, random_operations};
use super::program::Pacing;
use super::sweep::{run_operations, SweepOptions};
use super::HarnessError;

/// Scale every cell delay by an independent factor in `1 ± pct/100`.
/// Delays never drop below 1 fs.
pub fn perturb_delays(design: &Design, pct: f64, seed: u64) -> Design {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = design.clone();
    let span = pct / 100.0;
    for c in out.cells.iter_mut().filter(|c| c.kind.uses_delay()) {
        let factor = 1.0 + rng.random_range(-span..=span);
        c.config.delay_fs = ((c.config.delay_fs as f64 * factor).round() as u64).max(1);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginOptions {
    pub perturb_pct: f64,
    pub trials: usize,
    pub seed: u64,
    pub jobs: usize,
    pub pacing: Pacing,
    /// Random words per trial for widths too large to enumerate.
    pub random_words: usize,
}

impl Default for MarginOptions {
    fn default() -> Self {
        MarginOptions {
            perturb_pct: 20.0,
            trials: 8,
            seed: 1,
            jobs: 1,
            pacing: Pacing::relaxed(),
            random_words: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub operations: usize,
    pub mismatches: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginReport {
    pub width: usize,
    pub perturb_pct: f64,
    /// Whether the register settling inequality holds at the worst corner
    /// of the perturbation range.
    pub settling_holds: bool,
    pub trials: Vec<TrialRecord>,
    pub pass: bool,
}

impl MarginReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Worst case: every term of the settling path slowed, the ring sped up.
fn settling_holds(config: &ShifterConfig, pct: f64) -> bool {
    let p = pct / 100.0;
    let path = (config.clock_skew_fs + config.set_path_fs()) as f64;
    path * (1.0 + p) < config.loop_delay_fs as f64 * (1.0 - p)
}

pub fn margin_sweep(config: &ShifterConfig, options: &MarginOptions) -> Result<MarginReport, HarnessError> {
    let nominal = build_shifter(config)?;
    let ops = if config.width <= 8 {
        exhaustive_operations(config.width)
    } else {
        random_operations(config.width, options.random_words, options.seed)
    };
    let sweep = SweepOptions {
        jobs: options.jobs,
        pacing: options.pacing,
        fail_cell: None,
    };
    let mut trials = Vec::with_capacity(options.trials);
    for trial in 0..options.trials {
        let seed = options.seed.wrapping_add(trial as u64);
        let design = perturb_delays(&nominal, options.perturb_pct, seed);
        let report = run_operations(&design, config, &ops, &sweep)?;
        trials.push(TrialRecord {
            trial,
            seed,
            operations: report.aggregate.operations,
            mismatches: report.aggregate.mismatches,
            pass: report.pass(),
        });
    }
    Ok(MarginReport {
        width: config.width,
        perturb_pct: options.perturb_pct,
        settling_holds: settling_holds(config, options.perturb_pct),
        pass: trials.iter().all(|t| t.pass),
        trials,
    })
}
