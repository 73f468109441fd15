//! Builders for the binary shifter and its two halves.
//!
//! The shifter is a bidirectional register of triple-port D3 flip-flops
//! driven by two RTFF ring generators. Port 1 of every D3 shifts right
//! (bit i to i+1), port 2 shifts left (bit i to i-1) and port 3 reads the
//! word out into SFQ/DC converters named `O0..O{N-1}`.
//!
//! A generator preloaded with operand `A` emits `2^b - 1 - A` clock pulses
//! and then one readout pulse, so callers load the bitwise complement of the
//! shift amount (see [`encode_shift_amount`]).

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cell::{CellConfig, CellKind, Port, DEFAULT_CELL_DELAY_FS};
use crate::netlist::{Design, Pin};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("invalid shifter configuration: {0}")]
    InvalidConfig(String),
    #[error("shift amount {k} does not fit in {bits} generator bits")]
    ShiftOutOfRange { k: u32, bits: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Direction {
    /// Bit i moves to i+1 (towards O{N-1}).
    #[serde(rename = "R")]
    Right,
    /// Bit i moves to i-1 (towards O0).
    #[serde(rename = "L")]
    Left,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Right, Direction::Left];

    pub fn letter(self) -> char {
        match self {
            Direction::Right => 'R',
            Direction::Left => 'L',
        }
    }

    fn generator_prefix(self) -> &'static str {
        match self {
            Direction::Right => "gr_",
            Direction::Left => "gl_",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Where the shift clock enters the register relative to data motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClockFlow {
    /// Clock enters at the end the data flows toward. Safe for any skew.
    CounterFlow,
    /// Clock travels with the data. Corrupts once the skew reaches the
    /// shortest D3-to-neighbour SET path, a D3 output plus one merge.
    CoFlow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShifterConfig {
    pub width: usize,
    pub generator_bits: u32,
    /// Period of the generator feedback ring, i.e. clock pulse spacing.
    pub loop_delay_fs: u64,
    /// Per-stage delay of the shift clock distribution chain.
    pub clock_skew_fs: u64,
    /// Delay of every routing and storage cell.
    pub cell_delay_fs: u64,
    /// CPU master clock period, used to express latency in cycles.
    pub master_period_fs: u64,
    pub clock_flow: ClockFlow,
}

impl Default for ShifterConfig {
    fn default() -> Self {
        ShifterConfig {
            width: 8,
            generator_bits: 3,
            loop_delay_fs: 30_000,
            clock_skew_fs: 2_000,
            cell_delay_fs: DEFAULT_CELL_DELAY_FS,
            master_period_fs: 100_000,
            clock_flow: ClockFlow::CounterFlow,
        }
    }
}

impl ShifterConfig {
    /// Default configuration for `width` bits with the smallest generator
    /// that can count to `width - 1`.
    pub fn for_width(width: usize) -> ShifterConfig {
        ShifterConfig {
            width,
            generator_bits: min_generator_bits(width),
            ..ShifterConfig::default()
        }
    }

    /// Largest operand the generator accepts, `2^b - 1`.
    pub fn max_operand(&self) -> u32 {
        (1u32 << self.generator_bits) - 1
    }

    /// Worst-case delay from a D3 read to the neighbour's SET input: the D3
    /// output plus the two merges in front of every interior SET.
    pub fn set_path_fs(&self) -> u64 {
        3 * self.cell_delay_fs
    }

    /// Delay of the tuning JTL that pads the generator ring to
    /// `loop_delay_fs`; `None` when the ring is already longer than that.
    pub fn tuning_delay_fs(&self) -> Option<u64> {
        let fixed = ring_fixed_delay(self.generator_bits, self.cell_delay_fs);
        self.loop_delay_fs.checked_sub(fixed).filter(|&t| t > 0)
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let bad = |m: String| Err(CircuitError::InvalidConfig(m));
        if self.width < 2 {
            return bad(format!("width {} < 2", self.width));
        }
        if self.width > 64 {
            return bad(format!("width {} > 64", self.width));
        }
        if self.generator_bits == 0 || self.generator_bits > 16 {
            return bad(format!("generator bits {} outside 1..=16", self.generator_bits));
        }
        if (1usize << self.generator_bits) < self.width {
            return bad(format!(
                "2^{} < width {}",
                self.generator_bits, self.width
            ));
        }
        if self.cell_delay_fs == 0 || self.clock_skew_fs == 0 || self.master_period_fs == 0 {
            return bad("cell delay, clock skew and master period must be positive".into());
        }
        if self.clock_skew_fs + self.set_path_fs() >= self.loop_delay_fs {
            return bad(format!(
                "settling violated: skew {} + set path {} >= loop delay {}",
                self.clock_skew_fs,
                self.set_path_fs(),
                self.loop_delay_fs
            ));
        }
        if self.tuning_delay_fs().is_none() {
            return bad(format!(
                "loop delay {} fs is not longer than the ring's fixed delay {} fs",
                self.loop_delay_fs,
                ring_fixed_delay(self.generator_bits, self.cell_delay_fs)
            ));
        }
        Ok(())
    }
}

pub fn min_generator_bits(width: usize) -> u32 {
    let mut bits = 1;
    while (1usize << bits) < width {
        bits += 1;
    }
    bits
}

/// Operand to preload for a shift by `k`: the `bits`-wide complement.
pub fn encode_shift_amount(k: u32, bits: u32) -> Result<u32, CircuitError> {
    let max = (1u32 << bits) - 1;
    if k > max {
        return Err(CircuitError::ShiftOutOfRange { k, bits });
    }
    Ok(max - k)
}

// External port and cell names shared with the harness.

pub fn load_port(bit: usize) -> String {
    format!("IN{bit}")
}

pub fn operand_port(dir: Direction, bit: u32) -> String {
    match dir {
        Direction::Right => format!("SRA{bit}"),
        Direction::Left => format!("SLA{bit}"),
    }
}

pub fn launch_port(dir: Direction) -> &'static str {
    match dir {
        Direction::Right => "SR_LAUNCH",
        Direction::Left => "SL_LAUNCH",
    }
}

/// SFQ/DC converter cell that presents output bit `bit`.
pub fn output_cell(bit: usize) -> String {
    format!("O{bit}")
}

pub fn register_cell(bit: usize) -> String {
    format!("d3_{bit}")
}

/// RTFF `bit` of the generator serving `dir` in an assembled shifter.
pub fn generator_cell(dir: Direction, bit: u32) -> String {
    format!("{}tff{bit}", dir.generator_prefix())
}

/// Name of the net carrying the generator's shift clock in a shifter.
pub fn clock_out_net(dir: Direction) -> String {
    format!("{}fbs.OUT2", dir.generator_prefix())
}

/// Name of the net carrying the generator's readout pulse in a shifter.
pub fn readout_net(dir: Direction, bits: u32) -> String {
    format!("{}tff{}.INVERTED", dir.generator_prefix(), bits - 1)
}

/// Delay of the ring excluding the tuning JTL: launch merge, the slowest
/// RTFF-to-feedback path and the feedback split.
fn ring_fixed_delay(bits: u32, d: u64) -> u64 {
    feedback_arrival(bits, d).into_iter().max().unwrap_or(0) + 2 * d
}

/// Delay from a pulse reaching RTFF0.T to the feedback node for each RTFF
/// that may emit the DIRECT pulse, before padding.
fn feedback_arrival(bits: u32, d: u64) -> Vec<u64> {
    (0..bits)
        .map(|i| {
            let merges = if bits == 1 {
                0
            } else if i == 0 {
                bits - 1
            } else {
                bits - i
            };
            u64::from(i + 1) * d + u64::from(merges) * d
        })
        .collect()
}

struct GeneratorPins {
    operand: Vec<Pin>,
    launch: Pin,
    clock_out: Pin,
    readout: Pin,
}

/// Ring of `bits` RTFFs. Each T pulse increments the counter held in the
/// RTFFs (bit 0 first); an increment that stops inside the counter leaves
/// through a DIRECT output and re-enters as the next clock pulse, the
/// overflow leaves through the last INVERTED output as readout.
fn add_generator(d: &mut Design, prefix: &str, cfg: &ShifterConfig) -> GeneratorPins {
    let bits = cfg.generator_bits;
    let delay = cfg.cell_delay_fs;
    let cell = CellConfig::with_delay(delay);
    let name = |s: &str| format!("{prefix}{s}");

    let tff: Vec<String> = (0..bits)
        .map(|i| d.add_cell(name(&format!("tff{i}")), CellKind::Rtff, cell))
        .collect();
    let launch_merge = d.add_cell(name("lm"), CellKind::Merge, cell);
    d.connect(Pin::new(&launch_merge, Port::Out), Pin::new(&tff[0], Port::T));
    for pair in tff.windows(2) {
        d.connect(Pin::new(&pair[0], Port::Inverted), Pin::new(&pair[1], Port::T));
    }

    // Equalise RTFF-to-feedback paths so every clock pulse is one loop apart.
    let arrival = feedback_arrival(bits, delay);
    let slowest = arrival.iter().copied().max().unwrap_or(0);
    let sources: Vec<Pin> = tff
        .iter()
        .zip(&arrival)
        .enumerate()
        .map(|(i, (t, &a))| {
            let direct = Pin::new(t, Port::Direct);
            if a < slowest {
                let pad = d.add_cell(
                    name(&format!("pad{i}")),
                    CellKind::Jtl,
                    CellConfig::with_delay(slowest - a),
                );
                d.connect(direct, Pin::new(&pad, Port::In));
                Pin::new(pad, Port::Out)
            } else {
                direct
            }
        })
        .collect();

    let mut node = sources[0].clone();
    for (k, src) in sources.iter().enumerate().skip(1) {
        let m = d.add_cell(name(&format!("fbm{}", k - 1)), CellKind::Merge, cell);
        d.connect(node, Pin::new(&m, Port::A));
        d.connect(src.clone(), Pin::new(&m, Port::B));
        node = Pin::new(m, Port::Out);
    }

    let tune_delay = cfg
        .tuning_delay_fs()
        .expect("validated configuration has a positive tuning delay");
    let tune = d.add_cell(name("tune"), CellKind::Jtl, CellConfig::with_delay(tune_delay));
    d.connect(node, Pin::new(&tune, Port::In));
    let split = d.add_cell(name("fbs"), CellKind::Split, cell);
    d.connect(Pin::new(&tune, Port::Out), Pin::new(&split, Port::In));
    d.connect(Pin::new(&split, Port::Out1), Pin::new(&launch_merge, Port::B));

    GeneratorPins {
        operand: tff.iter().map(|t| Pin::new(t, Port::Set)).collect(),
        launch: Pin::new(&launch_merge, Port::A),
        clock_out: Pin::new(&split, Port::Out2),
        readout: Pin::new(&tff[bits as usize - 1], Port::Inverted),
    }
}

/// Standalone pulse generator with ports `A0..A{b-1}`, `LAUNCH`,
/// `CLOCK_OUT` and `READOUT`. Cells are prefixed `gen_`.
pub fn build_generator(bits: u32, config: &ShifterConfig) -> Result<Design, CircuitError> {
    // the register width plays no part in a lone generator
    let cfg = ShifterConfig {
        generator_bits: bits,
        width: 2,
        ..*config
    };
    cfg.validate()?;
    let mut d = Design::new();
    let g = add_generator(&mut d, "gen_", &cfg);
    for (i, pin) in g.operand.into_iter().enumerate() {
        d.input(format!("A{i}"), pin);
    }
    d.input("LAUNCH", g.launch);
    d.output(g.clock_out, "CLOCK_OUT");
    d.output(g.readout, "READOUT");
    Ok(d)
}

struct RegisterPins {
    load: Vec<Pin>,
    shift_right: Pin,
    shift_left: Pin,
    read: Pin,
}

fn add_register(d: &mut Design, cfg: &ShifterConfig) -> RegisterPins {
    let n = cfg.width;
    let cell = CellConfig::with_delay(cfg.cell_delay_fs);
    let regs: Vec<String> = (0..n)
        .map(|i| d.add_cell(register_cell(i), CellKind::D3, cell))
        .collect();

    // SET fan-in: shift-right data from i-1, shift-left data from i+1, load.
    let mut load = Vec::with_capacity(n);
    for i in 0..n {
        let mut feeds = Vec::new();
        if i > 0 {
            feeds.push(Pin::new(&regs[i - 1], Port::O1));
        }
        if i + 1 < n {
            feeds.push(Pin::new(&regs[i + 1], Port::O2));
        }
        let shifted = if feeds.len() == 2 {
            let m = d.add_cell(format!("set{i}_a"), CellKind::Merge, cell);
            d.connect(feeds[0].clone(), Pin::new(&m, Port::A));
            d.connect(feeds[1].clone(), Pin::new(&m, Port::B));
            Pin::new(m, Port::Out)
        } else {
            feeds.pop().expect("width >= 2 gives every cell a neighbour")
        };
        let m = d.add_cell(format!("set{i}_b"), CellKind::Merge, cell);
        d.connect(shifted, Pin::new(&m, Port::A));
        d.connect(Pin::new(&m, Port::Out), Pin::new(&regs[i], Port::Set));
        load.push(Pin::new(m, Port::B));
    }

    let sink_r = d.add_cell("sink_r", CellKind::Sink, CellConfig::default());
    d.connect(Pin::new(&regs[n - 1], Port::O1), Pin::new(sink_r, Port::In));
    let sink_l = d.add_cell("sink_l", CellKind::Sink, CellConfig::default());
    d.connect(Pin::new(&regs[0], Port::O2), Pin::new(sink_l, Port::In));

    for (i, r) in regs.iter().enumerate() {
        let conv = d.add_cell(output_cell(i), CellKind::SfqDc, cell);
        d.connect(Pin::new(r, Port::O3), Pin::new(conv, Port::In));
    }

    let downward: Vec<usize> = (0..n).rev().collect();
    let upward: Vec<usize> = (0..n).collect();
    let (right_order, left_order) = match cfg.clock_flow {
        ClockFlow::CounterFlow => (downward, upward),
        ClockFlow::CoFlow => (upward, downward),
    };
    let shift_right = add_clock_chain(d, "sr", Port::In1, &right_order, &regs, cfg.clock_skew_fs);
    let shift_left = add_clock_chain(d, "sl", Port::In2, &left_order, &regs, cfg.clock_skew_fs);

    // Hold the read back until the slowest SET of a final shift has landed.
    let align = d.add_cell(
        "rd_align",
        CellKind::Jtl,
        CellConfig::with_delay(n as u64 * cfg.clock_skew_fs + cfg.set_path_fs()),
    );
    let leaves: Vec<Pin> = regs.iter().map(|r| Pin::new(r, Port::In3)).collect();
    let depth = min_generator_bits(n);
    let root = add_split_tree(d, "rd".to_string(), &leaves, depth, cell);
    d.connect(Pin::new(&align, Port::Out), root);

    RegisterPins {
        load,
        shift_right,
        shift_left,
        read: Pin::new(align, Port::In),
    }
}

/// Split chain visiting `order`, one `skew` per stage. Returns the entry pin.
fn add_clock_chain(
    d: &mut Design,
    prefix: &str,
    port: Port,
    order: &[usize],
    regs: &[String],
    skew: u64,
) -> Pin {
    let stage = CellConfig::with_delay(skew);
    let splits: Vec<String> = (0..order.len() - 1)
        .map(|j| d.add_cell(format!("{prefix}_s{j}"), CellKind::Split, stage))
        .collect();
    for (j, s) in splits.iter().enumerate() {
        d.connect(Pin::new(s, Port::Out1), Pin::new(&regs[order[j]], port));
        if let Some(next) = splits.get(j + 1) {
            d.connect(Pin::new(s, Port::Out2), Pin::new(next, Port::In));
        }
    }
    let tail = d.add_cell(format!("{prefix}_tail"), CellKind::Jtl, stage);
    d.connect(
        Pin::new(splits.last().expect("width >= 2"), Port::Out2),
        Pin::new(&tail, Port::In),
    );
    d.connect(
        Pin::new(tail, Port::Out),
        Pin::new(&regs[*order.last().expect("width >= 2")], port),
    );
    Pin::new(&splits[0], Port::In)
}

/// Balanced split tree of uniform `depth`; unused branches end in SINKs.
fn add_split_tree(d: &mut Design, path: String, leaves: &[Pin], depth: u32, cell: CellConfig) -> Pin {
    if depth == 0 {
        return leaves[0].clone();
    }
    let half = leaves.len().min(1 << (depth - 1));
    let (lo, hi) = leaves.split_at(half);
    let s = d.add_cell(&path, CellKind::Split, cell);
    let sep = if path == "rd" { "_" } else { "" };
    let lo_pin = add_split_tree(d, format!("{path}{sep}0"), lo, depth - 1, cell);
    d.connect(Pin::new(&s, Port::Out1), lo_pin);
    if hi.is_empty() {
        let k = d.add_cell(format!("{path}{sep}x"), CellKind::Sink, CellConfig::default());
        d.connect(Pin::new(&s, Port::Out2), Pin::new(k, Port::In));
    } else {
        let hi_pin = add_split_tree(d, format!("{path}{sep}1"), hi, depth - 1, cell);
        d.connect(Pin::new(&s, Port::Out2), hi_pin);
    }
    Pin::new(s, Port::In)
}

/// Standalone register with ports `IN0..`, `SR_CLK`, `SL_CLK`, `READ_CLK`
/// and converter cells `O0..`.
pub fn build_register(width: usize, config: &ShifterConfig) -> Result<Design, CircuitError> {
    let cfg = ShifterConfig {
        width,
        generator_bits: config.generator_bits.max(min_generator_bits(width)),
        ..*config
    };
    cfg.validate()?;
    let mut d = Design::new();
    let r = add_register(&mut d, &cfg);
    for (i, pin) in r.load.into_iter().enumerate() {
        d.input(load_port(i), pin);
    }
    d.input("SR_CLK", r.shift_right);
    d.input("SL_CLK", r.shift_left);
    d.input("READ_CLK", r.read);
    Ok(d)
}

/// The complete shifter: register, right and left generators, and the
/// readout merge that turns either generator's completion into a read.
pub fn build_shifter(config: &ShifterConfig) -> Result<Design, CircuitError> {
    config.validate()?;
    let mut d = Design::new();
    let reg = add_register(&mut d, config);
    let right = add_generator(&mut d, Direction::Right.generator_prefix(), config);
    let left = add_generator(&mut d, Direction::Left.generator_prefix(), config);

    d.connect(right.clock_out.clone(), reg.shift_right);
    d.connect(left.clock_out.clone(), reg.shift_left);
    let rd = d.add_cell("rd_merge", CellKind::Merge, CellConfig::with_delay(config.cell_delay_fs));
    d.connect(right.readout.clone(), Pin::new(&rd, Port::A));
    d.connect(left.readout.clone(), Pin::new(&rd, Port::B));
    d.connect(Pin::new(rd, Port::Out), reg.read);

    for (i, pin) in reg.load.into_iter().enumerate() {
        d.input(load_port(i), pin);
    }
    for (dir, g) in [(Direction::Right, right), (Direction::Left, left)] {
        for (j, pin) in g.operand.into_iter().enumerate() {
            d.input(operand_port(dir, j as u32), pin);
        }
        d.input(launch_port(dir), g.launch);
    }
    Ok(d)
}
