//! Deterministic discrete-event kernel.
//!
//! Pulses in flight are `(time, seq, net)` triples in a min-heap. Ties in
//! time are broken by insertion sequence, so a run is a pure function of the
//! circuit, the stimulus and the configuration.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::cell::{self, CellConfig, CellError, CellKind, CellNote, CellState, Port};
use crate::netlist::{check_design, has_errors, Design, Diagnostic, Endpoint};
use crate::time::TimeFs;

pub const DEFAULT_EVENT_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NetId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CellId(pub u32);

#[derive(Debug, Error)]
pub enum SimError {
    #[error("event scheduled at {at} but simulation time is already {now}")]
    SchedulingInPast { at: TimeFs, now: TimeFs },
    #[error("aborted after delivering {delivered} events (cap {cap}) at {time}")]
    NonTermination { delivered: u64, cap: u64, time: TimeFs },
    #[error("unknown net {0:?}")]
    UnknownNet(NetId),
    #[error("unknown external input `{0}`")]
    UnknownInput(String),
    #[error("stimulus is not sorted by time at entry {0}")]
    UnsortedStimulus(usize),
    #[error("design failed the design-rule check with {} error(s)", .0.iter().filter(|d| d.is_error()).count())]
    InvalidDesign(Vec<Diagnostic>),
    #[error(transparent)]
    Cell(#[from] CellError),
}

/// An SFQ pulse in flight toward the sink of `net`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PulseEvent {
    pub time: TimeFs,
    pub seq: u64,
    pub net: NetId,
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<PulseEvent>>,
    now: TimeFs,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> EventQueue {
        EventQueue::default()
    }

    pub fn now(&self) -> TimeFs {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, time: TimeFs, net: NetId) -> Result<u64, SimError> {
        if time < self.now {
            return Err(SimError::SchedulingInPast {
                at: time,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(PulseEvent { time, seq, net }));
        Ok(seq)
    }

    /// Remove the earliest event and advance the clock to it.
    pub fn pop(&mut self) -> Option<PulseEvent> {
        let Reverse(ev) = self.heap.pop()?;
        self.now = ev.time;
        Some(ev)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PulseRecord {
    pub time: TimeFs,
    pub net: NetId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LevelRecord {
    pub time: TimeFs,
    pub cell: CellId,
    pub level: bool,
}

/// Everything observable about a run: every delivered pulse and every
/// converter level change, in delivery order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub records: Vec<PulseRecord>,
    pub levels: Vec<LevelRecord>,
    net_count: usize,
}

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.records.is_empty() && self.levels.is_empty()
    }

    /// Pulses delivered on `net` with `window.start <= time < window.end`.
    pub fn count_pulses(&self, net: NetId, window: Range<TimeFs>) -> Result<usize, SimError> {
        if net.0 as usize >= self.net_count {
            return Err(SimError::UnknownNet(net));
        }
        Ok(self
            .records
            .iter()
            .filter(|r| r.net == net && window.contains(&r.time))
            .count())
    }

    pub fn pulses_on(&self, net: NetId) -> impl Iterator<Item = TimeFs> + '_ {
        self.records.iter().filter(move |r| r.net == net).map(|r| r.time)
    }

    pub fn levels_of(&self, cell: CellId) -> impl Iterator<Item = &LevelRecord> + '_ {
        self.levels.iter().filter(move |l| l.cell == cell)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimDiagnosticKind {
    /// SET and a read/toggle input reached one storage cell at the same time.
    TimingViolation,
    /// SET arrived at a cell already holding a quantum.
    RepeatedSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimDiagnostic {
    pub time: TimeFs,
    pub cell: CellId,
    pub kind: SimDiagnosticKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub event_cap: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            event_cap: DEFAULT_EVENT_CAP,
        }
    }
}

#[derive(Debug, Clone)]
struct CompiledCell {
    name: String,
    kind: CellKind,
    config: CellConfig,
    /// Net driven by each output port, indexed like `kind.outputs()`.
    drives: [Option<NetId>; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetSink {
    Pin { cell: CellId, port: Port },
    External,
}

#[derive(Debug, Clone)]
struct CompiledNet {
    name: String,
    sink: NetSink,
    wire_delay_fs: u64,
}

/// A design that passed the DRC, indexed for simulation. Immutable and
/// shareable across threads.
#[derive(Debug, Clone)]
pub struct Circuit {
    cells: Vec<CompiledCell>,
    nets: Vec<CompiledNet>,
    cell_ids: HashMap<String, CellId>,
    net_ids: HashMap<String, NetId>,
    inputs: HashMap<String, NetId>,
    outputs: Vec<(String, NetId)>,
    warnings: Vec<Diagnostic>,
}

impl Circuit {
    pub fn compile(design: &Design) -> Result<Circuit, SimError> {
        let diags = check_design(design);
        if has_errors(&diags) {
            return Err(SimError::InvalidDesign(diags));
        }
        let mut cell_ids = HashMap::new();
        let mut cells = Vec::with_capacity(design.cells.len());
        for (i, c) in design.cells.iter().enumerate() {
            cell_ids.insert(c.name.clone(), CellId(i as u32));
            cells.push(CompiledCell {
                name: c.name.clone(),
                kind: c.kind,
                config: c.config,
                drives: [None; 3],
            });
        }
        let mut nets = Vec::with_capacity(design.nets.len());
        let mut net_ids = HashMap::new();
        let mut inputs = HashMap::new();
        let mut outputs = Vec::new();
        for (i, n) in design.nets.iter().enumerate() {
            let id = NetId(i as u32);
            match &n.driver {
                Endpoint::Pin(p) => {
                    let cell = &mut cells[cell_ids[&p.cell].0 as usize];
                    let slot = cell
                        .kind
                        .outputs()
                        .iter()
                        .position(|&o| o == p.port)
                        .expect("DRC validated output port");
                    cell.drives[slot] = Some(id);
                }
                Endpoint::External(name) => {
                    inputs.insert(name.clone(), id);
                }
            }
            let sink = match &n.sink {
                Endpoint::Pin(p) => NetSink::Pin {
                    cell: cell_ids[&p.cell],
                    port: p.port,
                },
                Endpoint::External(name) => {
                    outputs.push((name.clone(), id));
                    NetSink::External
                }
            };
            let name = n.name();
            net_ids.insert(name.clone(), id);
            nets.push(CompiledNet {
                name,
                sink,
                wire_delay_fs: n.wire_delay_fs,
            });
        }
        Ok(Circuit {
            cells,
            nets,
            cell_ids,
            net_ids,
            inputs,
            outputs,
            warnings: diags,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn net_count(&self) -> usize {
        self.nets.len()
    }

    pub fn cell_id(&self, name: &str) -> Option<CellId> {
        self.cell_ids.get(name).copied()
    }

    pub fn cell_name(&self, id: CellId) -> &str {
        &self.cells[id.0 as usize].name
    }

    pub fn cell_kind(&self, id: CellId) -> CellKind {
        self.cells[id.0 as usize].kind
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellId, &str, CellKind)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, c)| (CellId(i as u32), c.name.as_str(), c.kind))
    }

    /// Net named after its driver: `cell.PORT` or the external input name.
    pub fn net_id(&self, name: &str) -> Option<NetId> {
        self.net_ids.get(name).copied()
    }

    pub fn net_name(&self, id: NetId) -> &str {
        &self.nets[id.0 as usize].name
    }

    pub fn net_sink(&self, id: NetId) -> NetSink {
        self.nets[id.0 as usize].sink
    }

    pub fn nets(&self) -> impl Iterator<Item = (NetId, &str)> + '_ {
        self.nets
            .iter()
            .enumerate()
            .map(|(i, n)| (NetId(i as u32), n.name.as_str()))
    }

    pub fn input_net(&self, name: &str) -> Option<NetId> {
        self.inputs.get(name).copied()
    }

    pub fn output_net(&self, name: &str) -> Option<NetId> {
        self.outputs.iter().find(|(n, _)| n == name).map(|(_, id)| *id)
    }

    /// External outputs in declaration order.
    pub fn outputs(&self) -> impl Iterator<Item = (&str, NetId)> + '_ {
        self.outputs.iter().map(|(n, id)| (n.as_str(), *id))
    }

    /// Warnings raised by the DRC when the circuit was compiled.
    pub fn warnings(&self) -> &[Diagnostic] {
        &self.warnings
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct StorageTiming {
    last_set: Option<TimeFs>,
    last_read: Option<TimeFs>,
}

/// One simulation instance over a borrowed circuit.
#[derive(Debug)]
pub struct Simulator<'c> {
    circuit: &'c Circuit,
    config: SimConfig,
    queue: EventQueue,
    states: Vec<CellState>,
    timing: Vec<StorageTiming>,
    trace: Trace,
    diagnostics: Vec<SimDiagnostic>,
    delivered: u64,
}

impl<'c> Simulator<'c> {
    pub fn new(circuit: &'c Circuit, config: SimConfig) -> Simulator<'c> {
        Simulator {
            circuit,
            config,
            queue: EventQueue::new(),
            states: circuit.cells.iter().map(|c| CellState::initial(c.kind)).collect(),
            timing: vec![StorageTiming::default(); circuit.cells.len()],
            trace: Trace {
                net_count: circuit.nets.len(),
                ..Trace::default()
            },
            diagnostics: Vec::new(),
            delivered: 0,
        }
    }

    pub fn now(&self) -> TimeFs {
        self.queue.now()
    }

    /// Queue a pulse entering the design at external input `input`.
    pub fn inject(&mut self, time: TimeFs, input: &str) -> Result<(), SimError> {
        let net = self
            .circuit
            .input_net(input)
            .ok_or_else(|| SimError::UnknownInput(input.to_string()))?;
        let delay = self.circuit.nets[net.0 as usize].wire_delay_fs;
        self.queue.schedule(time + delay, net)?;
        Ok(())
    }

    pub fn inject_all<S: AsRef<str>>(&mut self, stimulus: &[(TimeFs, S)]) -> Result<(), SimError> {
        for (i, w) in stimulus.windows(2).enumerate() {
            if w[1].0 < w[0].0 {
                return Err(SimError::UnsortedStimulus(i + 1));
            }
        }
        for (t, name) in stimulus {
            self.inject(*t, name.as_ref())?;
        }
        Ok(())
    }

    /// Deliver events until the queue is empty.
    pub fn run(&mut self) -> Result<(), SimError> {
        while let Some(ev) = self.queue.pop() {
            self.delivered += 1;
            if self.delivered > self.config.event_cap {
                return Err(SimError::NonTermination {
                    delivered: self.delivered,
                    cap: self.config.event_cap,
                    time: ev.time,
                });
            }
            self.deliver(ev)?;
        }
        Ok(())
    }

    fn deliver(&mut self, ev: PulseEvent) -> Result<(), SimError> {
        self.trace.records.push(PulseRecord {
            time: ev.time,
            net: ev.net,
        });
        let NetSink::Pin { cell, port } = self.circuit.nets[ev.net.0 as usize].sink else {
            return Ok(());
        };
        let idx = cell.0 as usize;
        let c = &self.circuit.cells[idx];
        if c.kind.is_storage() && !c.config.faulty {
            let timing = &mut self.timing[idx];
            let clash = if port == Port::Set {
                timing.last_set = Some(ev.time);
                timing.last_read == Some(ev.time)
            } else {
                timing.last_read = Some(ev.time);
                timing.last_set == Some(ev.time)
            };
            if clash {
                self.diagnostics.push(SimDiagnostic {
                    time: ev.time,
                    cell,
                    kind: SimDiagnosticKind::TimingViolation,
                });
            }
        }
        let reaction = cell::react(c.kind, &mut self.states[idx], &c.config, port, ev.time)?;
        if reaction.note == Some(CellNote::RepeatedSet) {
            self.diagnostics.push(SimDiagnostic {
                time: ev.time,
                cell,
                kind: SimDiagnosticKind::RepeatedSet,
            });
        }
        if let Some((time, level)) = reaction.level {
            self.trace.levels.push(LevelRecord { time, cell, level });
        }
        for (out, at) in reaction.pulses {
            let slot = c.kind.outputs().iter().position(|&o| o == out);
            if let Some(net) = slot.and_then(|s| c.drives[s]) {
                let wire = self.circuit.nets[net.0 as usize].wire_delay_fs;
                self.queue.schedule(at + wire, net)?;
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn diagnostics(&self) -> &[SimDiagnostic] {
        &self.diagnostics
    }

    pub fn state(&self, cell: CellId) -> CellState {
        self.states[cell.0 as usize]
    }

    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn finish(self) -> SimResult {
        SimResult {
            trace: self.trace,
            diagnostics: self.diagnostics,
            final_states: self.states,
            delivered: self.delivered,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub trace: Trace,
    pub diagnostics: Vec<SimDiagnostic>,
    pub final_states: Vec<CellState>,
    pub delivered: u64,
}

/// Compile, inject a sorted stimulus and run to quiescence.
pub fn run<S: AsRef<str>>(
    circuit: &Circuit,
    stimulus: &[(TimeFs, S)],
    config: SimConfig,
) -> Result<SimResult, SimError> {
    let mut sim = Simulator::new(circuit, config);
    sim.inject_all(stimulus)?;
    sim.run()?;
    Ok(sim.finish())
}

/// Convenience wrapper that compiles `design` first.
pub fn simulate<S: AsRef<str>>(
    design: &Design,
    stimulus: &[(TimeFs, S)],
    config: SimConfig,
) -> Result<SimResult, SimError> {
    let circuit = Circuit::compile(design)?;
    run(&circuit, stimulus, config)
}

impl fmt::Display for SimDiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimDiagnosticKind::TimingViolation => f.write_str("timing violation"),
            SimDiagnosticKind::RepeatedSet => f.write_str("repeated set"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_design;

    fn circuit(text: &str) -> Circuit {
        Circuit::compile(&parse_design(text).unwrap()).unwrap()
    }

    #[test]
    fn first_schedule_gets_seq_zero() {
        let mut q = EventQueue::new();
        assert_eq!(q.schedule(TimeFs(1000), NetId(0)).unwrap(), 0);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn ties_break_by_insertion_order() {
        let mut q = EventQueue::new();
        q.schedule(TimeFs(1000), NetId(1)).unwrap();
        q.schedule(TimeFs(1000), NetId(2)).unwrap();
        q.schedule(TimeFs(500), NetId(3)).unwrap();
        let order: Vec<_> = std::iter::from_fn(|| q.pop()).map(|e| e.net).collect();
        assert_eq!(order, vec![NetId(3), NetId(1), NetId(2)]);
    }

    #[test]
    fn scheduling_in_the_past_fails() {
        let mut q = EventQueue::new();
        q.schedule(TimeFs(2000), NetId(0)).unwrap();
        q.pop();
        assert!(matches!(
            q.schedule(TimeFs(1999), NetId(0)),
            Err(SimError::SchedulingInPast { .. })
        ));
        // same time is fine
        assert!(q.schedule(TimeFs(2000), NetId(0)).is_ok());
    }

    #[test]
    fn jtl_is_a_pure_delay() {
        let c = circuit("cell JTL j delay_fs=3000\ninput X -> j.IN\noutput j.OUT -> Y");
        let res = run(&c, &[(TimeFs(0), "X")], SimConfig::default()).unwrap();
        let y = c.output_net("Y").unwrap();
        assert_eq!(res.trace.pulses_on(y).collect::<Vec<_>>(), vec![TimeFs(3000)]);
    }

    #[test]
    fn empty_stimulus_yields_empty_trace() {
        let c = circuit("cell JTL j\ninput X -> j.IN\noutput j.OUT -> Y");
        let res = run::<&str>(&c, &[], SimConfig::default()).unwrap();
        assert!(res.trace.is_empty());
        assert_eq!(res.delivered, 0);
    }

    #[test]
    fn count_pulses_uses_half_open_window() {
        let c = circuit("cell SINK k\ninput X -> k.IN");
        let x = c.input_net("X").unwrap();
        let stim = [(TimeFs(10), "X"), (TimeFs(20), "X"), (TimeFs(30), "X")];
        let res = run(&c, &stim, SimConfig::default()).unwrap();
        assert_eq!(res.trace.count_pulses(x, TimeFs(10)..TimeFs(30)).unwrap(), 2);
        assert!(matches!(
            res.trace.count_pulses(NetId(9), TimeFs(0)..TimeFs(1)),
            Err(SimError::UnknownNet(_))
        ));
    }

    #[test]
    fn wire_delay_adds_to_cell_delay() {
        let c = circuit("cell JTL a\ncell JTL b\ninput X -> a.IN\nnet a.OUT -> b.IN wire_delay_fs=500\noutput b.OUT -> Y");
        let res = run(&c, &[(TimeFs(0), "X")], SimConfig::default()).unwrap();
        let y = c.output_net("Y").unwrap();
        assert_eq!(res.trace.pulses_on(y).collect::<Vec<_>>(), vec![TimeFs(6500)]);
    }

    #[test]
    fn unconnected_output_pulses_are_dropped() {
        let c = circuit("cell SPLIT s\ncell SINK k\ninput X -> s.IN\nnet s.OUT1 -> k.IN");
        let res = run(&c, &[(TimeFs(0), "X")], SimConfig::default()).unwrap();
        assert_eq!(res.trace.records.len(), 2);
        assert!(!c.warnings().is_empty());
    }

    #[test]
    fn converter_levels_are_recorded() {
        let c = circuit("cell SFQDC o\ninput X -> o.IN");
        let res = run(&c, &[(TimeFs(0), "X"), (TimeFs(100), "X")], SimConfig::default()).unwrap();
        let levels: Vec<_> = res.trace.levels.iter().map(|l| (l.time.0, l.level)).collect();
        assert_eq!(levels, vec![(3000, true), (3100, false)]);
        assert_eq!(res.final_states[0], CellState::Level(false));
    }

    #[test]
    fn simultaneous_set_and_read_is_flagged() {
        let c = circuit("cell D3 d\ncell SINK k\ninput S -> d.SET\ninput R -> d.IN1\nnet d.O1 -> k.IN");
        let res = run(&c, &[(TimeFs(100), "S"), (TimeFs(100), "R")], SimConfig::default()).unwrap();
        assert_eq!(res.diagnostics.len(), 1);
        assert_eq!(res.diagnostics[0].kind, SimDiagnosticKind::TimingViolation);
        // seq order: SET first, so the read finds the quantum
        let o1 = c.net_id("d.O1").unwrap();
        assert_eq!(res.trace.pulses_on(o1).count(), 1);
    }

    #[test]
    fn rtff_set_and_toggle_clash_is_flagged() {
        let c = circuit("cell RTFF r\ncell SINK a\ncell SINK b\ninput S -> r.SET\ninput T -> r.T\nnet r.DIRECT -> a.IN\nnet r.INVERTED -> b.IN");
        let res = run(&c, &[(TimeFs(7), "T"), (TimeFs(7), "S")], SimConfig::default()).unwrap();
        assert_eq!(res.diagnostics[0].kind, SimDiagnosticKind::TimingViolation);
    }

    #[test]
    fn runaway_loop_hits_event_cap() {
        // a single pulse circulates through the merge/split ring forever
        let c = circuit(
            "cell MERGE m\ncell SPLIT s\ninput X -> m.A\nnet m.OUT -> s.IN\nnet s.OUT1 -> m.B\ncell MERGE m2\ncell SINK k\nnet s.OUT2 -> m2.A\nnet m2.OUT -> k.IN",
        );
        let err = run(&c, &[(TimeFs(0), "X")], SimConfig { event_cap: 1000 }).unwrap_err();
        assert!(matches!(err, SimError::NonTermination { delivered: 1001, .. }));
    }

    #[test]
    fn stimulus_must_be_sorted_and_known() {
        let c = circuit("cell SINK k\ninput X -> k.IN");
        assert!(matches!(
            run(&c, &[(TimeFs(5), "X"), (TimeFs(1), "X")], SimConfig::default()),
            Err(SimError::UnsortedStimulus(1))
        ));
        assert!(matches!(
            run(&c, &[(TimeFs(5), "Q")], SimConfig::default()),
            Err(SimError::UnknownInput(_))
        ));
    }

    #[test]
    fn invalid_design_is_rejected_at_compile() {
        let d = parse_design("cell JTL j\ncell SINK a\ncell SINK b\nnet j.OUT -> a.IN\nnet j.OUT -> b.IN").unwrap();
        assert!(matches!(Circuit::compile(&d), Err(SimError::InvalidDesign(_))));
    }
}
