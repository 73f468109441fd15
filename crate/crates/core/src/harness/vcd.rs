use std::collections::BTreeMap;

use vcd::{IdCode, SimulationCommand, TimescaleUnit, Value, Writer};

use crate::cell::CellKind;
use crate::kernel::{Circuit, Trace};

/// Width of the rectangle each SFQ pulse is drawn as.
pub const PULSE_WIDTH_FS: u64 = 1_000;

fn reference(name: &str) -> String {
    name.replace('.', "_")
}

/// Render a trace as a value change dump with a 1 fs timescale.
///
/// Every net becomes a wire under scope `nets` that is high for
/// [`PULSE_WIDTH_FS`] after each pulse (overlapping pulses merge). Each
/// SFQ/DC converter becomes a persistent level under scope `outputs`.
/// Identifier codes are assigned in net order, then converter order.
pub fn export_vcd(trace: &Trace, circuit: &Circuit) -> String {
    let mut buf = Vec::new();
    write_vcd(&mut buf, trace, circuit).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("VCD output is ASCII")
}

fn write_vcd(buf: &mut Vec<u8>, trace: &Trace, circuit: &Circuit) -> std::io::Result<()> {
    let mut w = Writer::new(buf);
    w.version("pulseflow")?;
    w.timescale(1, TimescaleUnit::FS)?;
    w.add_module("pulseflow")?;

    w.add_module("nets")?;
    let net_ids: Vec<IdCode> = circuit
        .nets()
        .map(|(_, name)| w.add_wire(1, &reference(name)))
        .collect::<Result<_, _>>()?;
    w.upscope()?;

    w.add_module("outputs")?;
    let mut level_ids = vec![None; circuit.cell_count()];
    for (id, name, kind) in circuit.cells() {
        if kind == CellKind::SfqDc {
            level_ids[id.0 as usize] = Some(w.add_wire(1, &reference(name))?);
        }
    }
    w.upscope()?;
    w.upscope()?;
    w.enddefinitions()?;

    w.begin(SimulationCommand::Dumpvars)?;
    for &id in net_ids.iter().chain(level_ids.iter().flatten()) {
        w.change_scalar(id, Value::V0)?;
    }
    w.end()?;

    // (time) -> (var order, value); BTreeMap keeps changes sorted.
    let mut changes: BTreeMap<u64, BTreeMap<usize, bool>> = BTreeMap::new();
    let mut per_net: Vec<Vec<u64>> = vec![Vec::new(); net_ids.len()];
    for r in &trace.records {
        per_net[r.net.0 as usize].push(r.time.0);
    }
    for (net, times) in per_net.iter().enumerate() {
        // union of [t, t + width) intervals
        let mut iter = times.iter().copied();
        let Some(first) = iter.next() else { continue };
        let (mut lo, mut hi) = (first, first + PULSE_WIDTH_FS);
        for t in iter {
            if t <= hi {
                hi = hi.max(t + PULSE_WIDTH_FS);
            } else {
                changes.entry(lo).or_default().insert(net, true);
                changes.entry(hi).or_default().insert(net, false);
                (lo, hi) = (t, t + PULSE_WIDTH_FS);
            }
        }
        changes.entry(lo).or_default().insert(net, true);
        changes.entry(hi).or_default().insert(net, false);
    }
    let mut level_slot = vec![None; circuit.cell_count()];
    let mut slot = net_ids.len();
    for (i, id) in level_ids.iter().enumerate() {
        if id.is_some() {
            level_slot[i] = Some(slot);
            slot += 1;
        }
    }
    let mut all_ids = net_ids.clone();
    all_ids.extend(level_ids.iter().flatten());
    let mut current = vec![false; all_ids.len()];
    for l in &trace.levels {
        if let Some(s) = level_slot[l.cell.0 as usize] {
            changes.entry(l.time.0).or_default().insert(s, l.level);
        }
    }

    for (time, vars) in changes {
        let effective: Vec<(usize, bool)> = vars
            .into_iter()
            .filter(|&(s, v)| current[s] != v)
            .collect();
        if effective.is_empty() {
            continue;
        }
        w.timestamp(time)?;
        for (s, v) in effective {
            current[s] = v;
            w.change_scalar(all_ids[s], if v { Value::V1 } else { Value::V0 })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{run, SimConfig};
    use crate::netlist::parse_design;
    use crate::time::TimeFs;

    fn circuit(text: &str) -> Circuit {
        Circuit::compile(&parse_design(text).unwrap()).unwrap()
    }

    #[test]
    fn single_pulse_is_a_one_fs_scaled_rectangle() {
        let c = circuit("cell SINK k\ninput X -> k.IN");
        let res = run(&c, &[(TimeFs(30_000_000), "X")], SimConfig::default()).unwrap();
        let text = export_vcd(&res.trace, &c);
        assert!(text.contains("$timescale 1 fs $end"));
        assert!(text.contains("$var wire 1 ! X $end"));
        assert!(text.ends_with("#30000000\n1!\n#30001000\n0!\n"), "{text}");
    }

    #[test]
    fn empty_trace_is_header_only() {
        let c = circuit("cell SINK k\ninput X -> k.IN");
        let res = run::<&str>(&c, &[], SimConfig::default()).unwrap();
        let text = export_vcd(&res.trace, &c);
        assert!(text.contains("$enddefinitions $end"));
        assert!(!text.lines().any(|l| l.starts_with('#')));
    }

    #[test]
    fn overlapping_pulses_merge_and_levels_persist() {
        let c = circuit("cell SPLIT s\ncell MERGE m\ncell SFQDC o\ninput X -> s.IN\nnet s.OUT1 -> m.A\nnet s.OUT2 -> m.B\nnet m.OUT -> o.IN");
        let res = run(&c, &[(TimeFs(0), "X")], SimConfig::default()).unwrap();
        let text = export_vcd(&res.trace, &c);
        // two pulses on m.OUT at the same instant draw one rectangle
        let m_out = text
            .lines()
            .find(|l| l.ends_with("m_OUT $end"))
            .and_then(|l| l.split_whitespace().nth(3))
            .unwrap()
            .to_string();
        assert_eq!(text.matches(&format!("\n1{m_out}\n")).count(), 1);
        // converter toggled twice at 9 ps: no net level change is emitted
        let o = text
            .lines()
            .find(|l| l.ends_with(" o $end"))
            .and_then(|l| l.split_whitespace().nth(3))
            .unwrap()
            .to_string();
        assert_eq!(text.matches(&format!("\n1{o}\n")).count(), 0);
    }
}
