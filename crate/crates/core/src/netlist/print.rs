use std::fmt::Write;

use super::design::{Design, Endpoint};

const HEADER: &str = "# pulseflow netlist";

/// Render a design in the netlist text format.
///
/// Output is canonical: cells sorted by name, then `input` lines, `net`
/// lines and `output` lines, each sorted by driver.
pub fn print_design(design: &Design) -> String {
    let d = design.normalized();
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for c in &d.cells {
        write!(out, "cell {} {} delay_fs={}", c.kind, c.name, c.config.delay_fs).unwrap();
        if c.config.faulty {
            out.push_str(" faulty=1");
        }
        out.push('\n');
    }
    let inputs = d.nets.iter().filter(|n| n.driver.external().is_some());
    let internal = d
        .nets
        .iter()
        .filter(|n| n.driver.pin().is_some() && n.sink.pin().is_some());
    let outputs = d.nets.iter().filter(|n| n.sink.external().is_some());
    for n in inputs {
        writeln!(out, "input {} -> {}", n.driver, n.sink).unwrap();
    }
    for n in internal {
        write!(out, "net {} -> {}", n.driver, n.sink).unwrap();
        if n.wire_delay_fs != 0 {
            write!(out, " wire_delay_fs={}", n.wire_delay_fs).unwrap();
        }
        out.push('\n');
    }
    for n in outputs {
        if matches!(n.driver, Endpoint::Pin(_)) {
            writeln!(out, "output {} -> {}", n.driver, n.sink).unwrap();
        }
    }
    out
}
