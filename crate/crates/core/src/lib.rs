//! Event-driven pulse-level simulation of single-flux-quantum logic.
//!
//! The crate is layered bottom-up:
//!
//! - [`cell`]: behavioral models of JTL, SPLIT, MERGE, DRO, D3, RTFF, SFQ/DC
//!   and SINK cells.
//! - [`netlist`]: the flat netlist model, its text format and the DRC.
//! - [`kernel`]: the deterministic event queue and simulator.
//! - [`circuits`]: builders for the bidirectional D3 shift register, the
//!   RTFF ring pulse generator and the assembled binary shifter.
//! - [`harness`]: golden model, operation programs, test patterns, sweeps,
//!   JSON reports and VCD export.

pub mod cell;
pub mod circuits;
pub mod harness;
pub mod kernel;
pub mod netlist;
pub mod time;

pub use cell::{CellConfig, CellKind, CellState, Port};
pub use circuits::{build_generator, build_register, build_shifter, encode_shift_amount, ClockFlow, ShifterConfig};
pub use kernel::{Circuit, SimConfig, SimError, Simulator, Trace};
pub use netlist::{check_design, parse_design, print_design, Design, Diagnostic};
pub use time::TimeFs;
