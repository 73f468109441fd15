use serde::Serialize;

use crate::circuits::{
    encode_shift_amount, launch_port, load_port, operand_port, Direction, ShifterConfig,
};
use crate::time::TimeFs;

use super::golden::mask;
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Step {
    Load(u64),
    Shift { dir: Direction, k: u32 },
    Expect(u64),
}

/// A flat LOAD / SHIFT / EXPECT sequence for an `width`-bit shifter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OpProgram {
    pub width: usize,
    pub steps: Vec<Step>,
}

/// One LOAD, SHIFT, EXPECT triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Operation {
    pub word: u64,
    pub dir: Direction,
    pub k: u32,
    pub expected: u64,
}

impl OpProgram {
    pub fn new(width: usize) -> OpProgram {
        OpProgram {
            width,
            steps: Vec::new(),
        }
    }

    pub fn from_operations(width: usize, ops: &[Operation]) -> OpProgram {
        let mut p = OpProgram::new(width);
        for op in ops {
            p.push(op.word, op.dir, op.k, op.expected);
        }
        p
    }

    pub fn push(&mut self, word: u64, dir: Direction, k: u32, expected: u64) {
        self.steps.push(Step::Load(word));
        self.steps.push(Step::Shift { dir, k });
        self.steps.push(Step::Expect(expected));
    }

    /// Group the steps into operations, rejecting anything that is not a
    /// sequence of LOAD, SHIFT, EXPECT triples.
    pub fn operations(&self) -> Result<Vec<Operation>, HarnessError> {
        let bad = |i: usize, m: &str| Err(HarnessError::InvalidProgram(format!("step {i}: {m}")));
        if !self.steps.len().is_multiple_of(3) {
            return bad(self.steps.len(), "program ends inside an operation");
        }
        let mut ops = Vec::with_capacity(self.steps.len() / 3);
        for (n, chunk) in self.steps.chunks(3).enumerate() {
            let i = n * 3;
            let (word, dir, k, expected) = match *chunk {
                [Step::Load(w), Step::Shift { dir, k }, Step::Expect(e)] => (w, dir, k, e),
                [Step::Load(_), Step::Shift { .. }, _] => return bad(i + 2, "expected EXPECT"),
                [Step::Load(_), _, _] => return bad(i + 1, "expected exactly one SHIFT after LOAD"),
                _ => return bad(i, "operation must start with LOAD"),
            };
            for w in [word, expected] {
                if w & !mask(self.width) != 0 {
                    return Err(HarnessError::WordOutOfRange {
                        word: w,
                        width: self.width,
                    });
                }
            }
            ops.push(Operation {
                word,
                dir,
                k,
                expected,
            });
        }
        Ok(ops)
    }
}

/// Spacing of operations in a compiled program. Each operation gets a
/// window of three pacing periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Pacing {
    pub period_fs: u64,
}

impl Pacing {
    pub const PERIODS_PER_OPERATION: u64 = 3;

    /// Paced at the 10 GHz master clock.
    pub fn master() -> Pacing {
        Pacing { period_fs: 100_000 }
    }

    /// Slow 1 GHz pacing; leaves room for wide generators.
    pub fn relaxed() -> Pacing {
        Pacing {
            period_fs: 1_000_000,
        }
    }

    pub fn window_fs(self) -> u64 {
        Self::PERIODS_PER_OPERATION * self.period_fs
    }
}

impl Default for Pacing {
    fn default() -> Self {
        Pacing::master()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpWindow {
    pub op: Operation,
    pub start: TimeFs,
    pub launch: TimeFs,
    pub end: TimeFs,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompiledProgram {
    pub stimulus: Vec<(TimeFs, String)>,
    pub windows: Vec<OpWindow>,
}

/// Turn a program into timed input pulses.
///
/// Each operation starts on a window boundary with SET pulses on `IN{i}`
/// for the word's one bits and on the selected generator's operand inputs
/// for the one bits of the encoded shift amount; the launch follows one
/// cell delay later.
pub fn compile_program(
    program: &OpProgram,
    config: &ShifterConfig,
    pacing: Pacing,
) -> Result<CompiledProgram, HarnessError> {
    if program.width != config.width {
        return Err(HarnessError::InvalidProgram(format!(
            "program width {} does not match shifter width {}",
            program.width, config.width
        )));
    }
    let ops = program.operations()?;
    let mut out = CompiledProgram::default();
    for (n, op) in ops.into_iter().enumerate() {
        let operand = encode_shift_amount(op.k, config.generator_bits)?;
        let start = TimeFs(n as u64 * pacing.window_fs());
        let launch = start + config.cell_delay_fs;
        for i in (0..program.width).filter(|i| (op.word >> i) & 1 == 1) {
            out.stimulus.push((start, load_port(i)));
        }
        for j in (0..config.generator_bits).filter(|j| (operand >> j) & 1 == 1) {
            out.stimulus.push((start, operand_port(op.dir, j)));
        }
        out.stimulus.push((launch, launch_port(op.dir).to_string()));
        out.windows.push(OpWindow {
            op,
            start,
            launch,
            end: start + pacing.window_fs(),
        });
    }
    Ok(out)
}
