use rayon::prelude::*;

use crate::cell::{CellKind, Port};
use crate::circuits::{build_shifter, clock_out_net, output_cell, Direction, ShifterConfig};
use crate::kernel::{self, CellId, Circuit, NetId, NetSink, SimConfig, SimDiagnosticKind, SimResult};
use crate::netlist::Design;

use super::program::{compile_program, CompiledProgram, OpProgram, OpWindow, Operation, Pacing};
use super::report::{OpRecord, RunReport};
use super::HarnessError;

/// Operations per simulation instance in a sweep. Fixed so that reports do
/// not depend on the number of worker threads.
const CHUNK: usize = 256;

/// Where to look in a compiled shifter for the signals a report needs.
#[derive(Debug, Clone)]
pub struct ShifterProbe {
    width: usize,
    master_period_fs: u64,
    /// Converter bit index per cell id.
    converter_bit: Vec<Option<usize>>,
    clock_out: [NetId; 2],
    /// True for nets whose sink is a D3 read port.
    read_leaf: Vec<bool>,
}

impl ShifterProbe {
    pub fn locate(circuit: &Circuit, config: &ShifterConfig) -> Result<ShifterProbe, HarnessError> {
        let mut converter_bit = vec![None; circuit.cell_count()];
        for bit in 0..config.width {
            let name = output_cell(bit);
            let id = circuit
                .cell_id(&name)
                .filter(|&id| circuit.cell_kind(id) == CellKind::SfqDc)
                .ok_or_else(|| HarnessError::Probe(format!("no converter `{name}`")))?;
            converter_bit[id.0 as usize] = Some(bit);
        }
        let clock = |dir| {
            let name = clock_out_net(dir);
            circuit
                .net_id(&name)
                .ok_or_else(|| HarnessError::Probe(format!("no clock net `{name}`")))
        };
        let clock_out = [clock(Direction::Right)?, clock(Direction::Left)?];
        let read_leaf = circuit
            .nets()
            .map(|(id, _)| match circuit.net_sink(id) {
                NetSink::Pin { cell, port } => {
                    port == Port::In3 && circuit.cell_kind(cell) == CellKind::D3
                }
                NetSink::External => false,
            })
            .collect();
        Ok(ShifterProbe {
            width: config.width,
            master_period_fs: config.master_period_fs,
            converter_bit,
            clock_out,
            read_leaf,
        })
    }

    pub fn clock_net(&self, dir: Direction) -> NetId {
        match dir {
            Direction::Right => self.clock_out[0],
            Direction::Left => self.clock_out[1],
        }
    }

    fn converter(&self, cell: CellId) -> Option<usize> {
        self.converter_bit[cell.0 as usize]
    }
}

#[derive(Default)]
struct WindowAcc {
    toggles: Vec<u32>,
    shift_pulses: usize,
    last_read: Option<u64>,
    diagnostics: Vec<String>,
    timing_violation: bool,
}

fn window_of(windows: &[OpWindow], t: u64) -> Option<usize> {
    let idx = windows.partition_point(|w| w.end.0 <= t);
    (idx < windows.len() && windows[idx].start.0 <= t).then_some(idx)
}

/// Derive one record per window from a finished run. The observed word
/// comes only from converter toggles inside the window.
pub(crate) fn evaluate(
    circuit: &Circuit,
    probe: &ShifterProbe,
    windows: &[OpWindow],
    result: &SimResult,
) -> Vec<OpRecord> {
    let mut acc: Vec<WindowAcc> = windows
        .iter()
        .map(|_| WindowAcc {
            toggles: vec![0; probe.width],
            ..WindowAcc::default()
        })
        .collect();

    for r in &result.trace.records {
        let Some(w) = window_of(windows, r.time.0) else {
            continue;
        };
        if r.net == probe.clock_net(windows[w].op.dir) {
            acc[w].shift_pulses += 1;
        }
        if probe.read_leaf[r.net.0 as usize] {
            let last = &mut acc[w].last_read;
            *last = Some(last.map_or(r.time.0, |l| l.max(r.time.0)));
        }
    }
    for l in &result.trace.levels {
        let (Some(w), Some(bit)) = (window_of(windows, l.time.0), probe.converter(l.cell)) else {
            continue;
        };
        acc[w].toggles[bit] += 1;
        let last = &mut acc[w].last_read;
        *last = Some(last.map_or(l.time.0, |x| x.max(l.time.0)));
    }
    for d in &result.diagnostics {
        if let Some(w) = window_of(windows, d.time.0) {
            acc[w].diagnostics.push(format!(
                "{} at {} t={}",
                d.kind,
                circuit.cell_name(d.cell),
                d.time.0
            ));
            acc[w].timing_violation |= d.kind == SimDiagnosticKind::TimingViolation;
        }
    }

    windows
        .iter()
        .zip(acc)
        .enumerate()
        .map(|(index, (w, a))| {
            let op = w.op;
            let observed = a
                .toggles
                .iter()
                .enumerate()
                .filter(|(_, &t)| t % 2 == 1)
                .map(|(i, _)| 1u64 << i)
                .sum::<u64>();
            let toggles_exact = a
                .toggles
                .iter()
                .enumerate()
                .all(|(i, &t)| u64::from(t) == (op.expected >> i) & 1);
            let first_divergent_output = (0..probe.width)
                .find(|&i| (observed ^ op.expected) >> i & 1 == 1)
                .map(output_cell);
            let latency_fs = a.last_read.map(|t| t.saturating_sub(w.launch.0));
            OpRecord {
                index,
                direction: op.dir,
                k: op.k,
                word: op.word,
                expected: op.expected,
                observed,
                pass: observed == op.expected
                    && toggles_exact
                    && a.shift_pulses == op.k as usize
                    && !a.timing_violation,
                shift_pulses: a.shift_pulses,
                latency_fs,
                latency_cycles: latency_fs.map(|l| l.div_ceil(probe.master_period_fs)),
                toggles: a.toggles,
                first_divergent_output,
                diagnostics: a.diagnostics,
            }
        })
        .collect()
}

/// Run a compiled program in one simulation instance.
pub fn run_program(
    circuit: &Circuit,
    config: &ShifterConfig,
    program: &CompiledProgram,
) -> Result<(RunReport, SimResult), HarnessError> {
    let probe = ShifterProbe::locate(circuit, config)?;
    let result = kernel::run(circuit, &program.stimulus, SimConfig::default())?;
    let records = evaluate(circuit, &probe, &program.windows, &result);
    Ok((
        RunReport::new(config.width, config.master_period_fs, records),
        result,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads; 1 runs on the calling thread.
    pub jobs: usize,
    pub pacing: Pacing,
    /// Register or generator cell to mark faulty before running.
    pub fail_cell: Option<String>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            jobs: 1,
            pacing: Pacing::relaxed(),
            fail_cell: None,
        }
    }
}

/// Run `ops` against `design`, split into fixed-size chunks that each get
/// a fresh simulation instance.
pub fn run_operations(
    design: &Design,
    config: &ShifterConfig,
    ops: &[Operation],
    options: &SweepOptions,
) -> Result<RunReport, HarnessError> {
    let circuit = Circuit::compile(design)?;
    let probe = ShifterProbe::locate(&circuit, config)?;
    let run_chunk = |chunk: &[Operation]| -> Result<Vec<OpRecord>, HarnessError> {
        let program = OpProgram::from_operations(config.width, chunk);
        let compiled = compile_program(&program, config, options.pacing)?;
        let result = kernel::run(&circuit, &compiled.stimulus, SimConfig::default())?;
        Ok(evaluate(&circuit, &probe, &compiled.windows, &result))
    };
    let chunks: Vec<Vec<OpRecord>> = if options.jobs <= 1 {
        ops.chunks(CHUNK).map(run_chunk).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| HarnessError::Probe(format!("thread pool: {e}")))?;
        pool.install(|| {
            ops.par_chunks(CHUNK)
                .map(run_chunk)
                .collect::<Result<Vec<_>, _>>()
        })?
    };
    Ok(RunReport::new(
        config.width,
        config.master_period_fs,
        chunks.into_iter().flatten().collect(),
    ))
}

pub(crate) fn mark_faulty(design: &mut Design, cell: &str) -> Result<(), HarnessError> {
    let c = design
        .cell_mut(cell)
        .ok_or_else(|| HarnessError::UnknownCell(cell.to_string()))?;
    c.config.faulty = true;
    Ok(())
}

/// All words, all shift amounts below the width, both directions.
pub fn exhaustive_sweep(config: &ShifterConfig, options: &SweepOptions) -> Result<RunReport, HarnessError> {
    let mut design = build_shifter(config)?;
    if let Some(cell) = &options.fail_cell {
        mark_faulty(&mut design, cell)?;
    }
    let ops = super::patterns::exhaustive_operations(config.width);
    run_operations(&design, config, &ops, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::patterns::staircase_pattern;

    #[test]
    fn staircase_passes_at_master_pacing() {
        let cfg = ShifterConfig::default();
        let circuit = Circuit::compile(&build_shifter(&cfg).unwrap()).unwrap();
        let compiled = compile_program(&staircase_pattern(8), &cfg, Pacing::master()).unwrap();
        let (report, result) = run_program(&circuit, &cfg, &compiled).unwrap();
        assert!(report.pass(), "{}", report.summary());
        assert!(result.diagnostics.is_empty());
    }

    #[test]
    fn jobs_do_not_change_the_report() {
        let cfg = ShifterConfig::for_width(4);
        let one = exhaustive_sweep(&cfg, &SweepOptions::default()).unwrap();
        let four = exhaustive_sweep(
            &cfg,
            &SweepOptions {
                jobs: 4,
                ..SweepOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one, four);
        assert_eq!(one.aggregate.operations, 128);
        assert!(one.pass());
    }

    #[test]
    fn unknown_fail_cell_is_an_error() {
        let opts = SweepOptions {
            fail_cell: Some("nope".into()),
            ..SweepOptions::default()
        };
        assert!(matches!(
            exhaustive_sweep(&ShifterConfig::for_width(4), &opts),
            Err(HarnessError::UnknownCell(_))
        ));
    }

    #[test]
    fn probe_rejects_non_shifter() {
        let d = crate::netlist::parse_design("cell SINK k\ninput X -> k.IN").unwrap();
        let c = Circuit::compile(&d).unwrap();
        assert!(ShifterProbe::locate(&c, &ShifterConfig::default()).is_err());
    }
}
