//! Verification harness: golden model, operation programs, the staircase
//! and exhaustive patterns, sweep runners, reports and VCD export.

mod golden;
mod margins;
mod patterns;
mod program;
mod report;
mod sweep;
mod vcd;

pub use golden::golden_shift;
pub use margins::{margin_sweep, perturb_delays, MarginOptions, MarginReport, TrialRecord};
pub use patterns::{exhaustive_operations, random_operations, staircase_pattern};
pub use program::{compile_program, CompiledProgram, OpProgram, OpWindow, Operation, Pacing, Step};
pub use report::{Aggregate, OpRecord, RunReport};
pub use sweep::{exhaustive_sweep, run_operations, run_program, ShifterProbe, SweepOptions};
pub use vcd::export_vcd;

use thiserror::Error;

use crate::circuits::CircuitError;
use crate::kernel::SimError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("word {word:#x} does not fit in {width} bits")]
    WordOutOfRange { word: u64, width: usize },
    #[error("shift amount {k} out of range for width {width}")]
    ShiftOutOfRange { k: u32, width: usize },
    #[error("design has no cell `{0}`")]
    UnknownCell(String),
    #[error("shifter probe: {0}")]
    Probe(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
