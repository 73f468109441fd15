//! Behavioral models of the SFQ cells used by the shifter.
//!
//! Every cell is a small state machine: a pulse arriving on an input port may
//! update the stored flux quantum and emits zero, one or two output pulses a
//! fixed delay later. Converters emit a level change instead of a pulse.

use std::fmt;
use std::str::FromStr;

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::TimeFs;

/// Default per-output delay of routing and storage cells.
pub const DEFAULT_CELL_DELAY_FS: u64 = 3_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Jtl,
    Split,
    Merge,
    Dro,
    D3,
    Rtff,
    SfqDc,
    Sink,
}

impl CellKind {
    pub const ALL: [CellKind; 8] = [
        CellKind::Jtl,
        CellKind::Split,
        CellKind::Merge,
        CellKind::Dro,
        CellKind::D3,
        CellKind::Rtff,
        CellKind::SfqDc,
        CellKind::Sink,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Jtl => "JTL",
            CellKind::Split => "SPLIT",
            CellKind::Merge => "MERGE",
            CellKind::Dro => "DRO",
            CellKind::D3 => "D3",
            CellKind::Rtff => "RTFF",
            CellKind::SfqDc => "SFQDC",
            CellKind::Sink => "SINK",
        }
    }

    pub fn inputs(self) -> &'static [Port] {
        use Port::*;
        match self {
            CellKind::Jtl | CellKind::Split | CellKind::SfqDc | CellKind::Sink => &[In],
            CellKind::Merge => &[A, B],
            CellKind::Dro => &[Set, In],
            CellKind::D3 => &[Set, In1, In2, In3],
            CellKind::Rtff => &[Set, T],
        }
    }

    pub fn outputs(self) -> &'static [Port] {
        use Port::*;
        match self {
            CellKind::Jtl | CellKind::Merge | CellKind::Dro => &[Out],
            CellKind::Split => &[Out1, Out2],
            CellKind::D3 => &[O1, O2, O3],
            CellKind::Rtff => &[Direct, Inverted],
            CellKind::SfqDc | CellKind::Sink => &[],
        }
    }

    pub fn has_input(self, port: Port) -> bool {
        self.inputs().contains(&port)
    }

    pub fn has_output(self, port: Port) -> bool {
        self.outputs().contains(&port)
    }

    pub fn has_port(self, port: Port) -> bool {
        self.has_input(port) || self.has_output(port)
    }

    /// Kinds whose SET input stores a flux quantum.
    pub fn is_storage(self) -> bool {
        matches!(self, CellKind::Dro | CellKind::D3 | CellKind::Rtff)
    }

    /// Kinds for which a delay is meaningful (SINK never emits anything).
    pub fn uses_delay(self) -> bool {
        !matches!(self, CellKind::Sink)
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown cell kind `{0}`")]
pub struct UnknownKind(pub String);

impl FromStr for CellKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CellKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

/// Pin names across all cell kinds. Which pins exist on which kind is given
/// by [`CellKind::inputs`] and [`CellKind::outputs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Port {
    In,
    Out,
    Out1,
    Out2,
    A,
    B,
    Set,
    In1,
    In2,
    In3,
    O1,
    O2,
    O3,
    T,
    Direct,
    Inverted,
}

impl Port {
    pub const ALL: [Port; 16] = [
        Port::In,
        Port::Out,
        Port::Out1,
        Port::Out2,
        Port::A,
        Port::B,
        Port::Set,
        Port::In1,
        Port::In2,
        Port::In3,
        Port::O1,
        Port::O2,
        Port::O3,
        Port::T,
        Port::Direct,
        Port::Inverted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Port::In => "IN",
            Port::Out => "OUT",
            Port::Out1 => "OUT1",
            Port::Out2 => "OUT2",
            Port::A => "A",
            Port::B => "B",
            Port::Set => "SET",
            Port::In1 => "IN1",
            Port::In2 => "IN2",
            Port::In3 => "IN3",
            Port::O1 => "O1",
            Port::O2 => "O2",
            Port::O3 => "O3",
            Port::T => "T",
            Port::Direct => "DIRECT",
            Port::Inverted => "INVERTED",
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown port `{0}`")]
pub struct UnknownPortName(pub String);

impl FromStr for Port {
    type Err = UnknownPortName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Port::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| UnknownPortName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellConfig {
    /// Delay applied to every output path of the cell.
    pub delay_fs: u64,
    /// A faulty cell swallows every pulse and never changes state.
    pub faulty: bool,
}

impl Default for CellConfig {
    fn default() -> Self {
        CellConfig {
            delay_fs: DEFAULT_CELL_DELAY_FS,
            faulty: false,
        }
    }
}

impl CellConfig {
    pub fn with_delay(delay_fs: u64) -> Self {
        CellConfig {
            delay_fs,
            ..CellConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CellState {
    Stateless,
    /// DRO, D3 and RTFF: one stored flux quantum or none.
    Stored(bool),
    /// SFQ/DC converter output level.
    Level(bool),
}

impl CellState {
    pub fn initial(kind: CellKind) -> CellState {
        match kind {
            CellKind::Dro | CellKind::D3 | CellKind::Rtff => CellState::Stored(false),
            CellKind::SfqDc => CellState::Level(false),
            _ => CellState::Stateless,
        }
    }

    pub fn stored_bit(self) -> Option<bool> {
        match self {
            CellState::Stored(b) => Some(b),
            _ => None,
        }
    }

    pub fn level(self) -> Option<bool> {
        match self {
            CellState::Level(l) => Some(l),
            _ => None,
        }
    }
}

/// Side observations a reaction can report without failing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellNote {
    /// SET arrived at a cell that already held a flux quantum.
    RepeatedSet,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Reaction {
    pub pulses: ArrayVec<(Port, TimeFs), 2>,
    /// New converter level and the time it becomes visible.
    pub level: Option<(TimeFs, bool)>,
    pub note: Option<CellNote>,
}

impl Reaction {
    fn emit(port: Port, at: TimeFs) -> Reaction {
        let mut r = Reaction::default();
        r.pulses.push((port, at));
        r
    }

    pub fn is_silent(&self) -> bool {
        self.pulses.is_empty() && self.level.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    #[error("{kind} has no input port {port}")]
    UnknownPort { kind: CellKind, port: Port },
    #[error("state {state:?} does not belong to a {kind} cell")]
    StateMismatch { kind: CellKind, state: CellState },
}

/// Apply one input pulse to a cell.
///
/// `t` is the arrival time; emitted pulses are stamped `t + delay_fs`.
pub fn react(
    kind: CellKind,
    state: &mut CellState,
    config: &CellConfig,
    port: Port,
    t: TimeFs,
) -> Result<Reaction, CellError> {
    if !kind.has_input(port) {
        return Err(CellError::UnknownPort { kind, port });
    }
    if config.faulty {
        return Ok(Reaction::default());
    }
    let at = t + config.delay_fs;
    match kind {
        CellKind::Jtl | CellKind::Merge => Ok(Reaction::emit(Port::Out, at)),
        CellKind::Split => {
            let mut r = Reaction::emit(Port::Out1, at);
            r.pulses.push((Port::Out2, at));
            Ok(r)
        }
        CellKind::Sink => Ok(Reaction::default()),
        CellKind::Dro | CellKind::D3 => {
            let bit = stored(kind, state)?;
            match port {
                Port::Set => Ok(set(bit)),
                _ => {
                    if *bit {
                        *bit = false;
                        Ok(Reaction::emit(readout_port(port), at))
                    } else {
                        Ok(Reaction::default())
                    }
                }
            }
        }
        CellKind::Rtff => {
            let bit = stored(kind, state)?;
            match port {
                Port::Set => Ok(set(bit)),
                _ => {
                    let out = if *bit { Port::Inverted } else { Port::Direct };
                    *bit = !*bit;
                    Ok(Reaction::emit(out, at))
                }
            }
        }
        CellKind::SfqDc => match state {
            CellState::Level(level) => {
                *level = !*level;
                Ok(Reaction {
                    level: Some((at, *level)),
                    ..Reaction::default()
                })
            }
            other => Err(CellError::StateMismatch {
                kind,
                state: *other,
            }),
        },
    }
}

fn stored(kind: CellKind, state: &mut CellState) -> Result<&mut bool, CellError> {
    match state {
        CellState::Stored(bit) => Ok(bit),
        other => Err(CellError::StateMismatch {
            kind,
            state: *other,
        }),
    }
}

fn set(bit: &mut bool) -> Reaction {
    let mut r = Reaction::default();
    if *bit {
        r.note = Some(CellNote::RepeatedSet);
    }
    *bit = true;
    r
}

fn readout_port(input: Port) -> Port {
    match input {
        Port::In1 => Port::O1,
        Port::In2 => Port::O2,
        Port::In3 => Port::O3,
        _ => Port::Out,
    }
}
