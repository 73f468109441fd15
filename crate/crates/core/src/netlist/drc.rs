use std::collections::{HashMap, HashSet};

use super::design::{Design, Endpoint};
use super::{DiagCode, Diagnostic};

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Structural design-rule check for the SFQ point-to-point discipline.
///
/// Loops are legal. Errors block simulation; warnings flag pins left
/// unconnected.
pub fn check_design(design: &Design) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let mut cells = HashMap::new();
    for c in &design.cells {
        if cells.insert(c.name.as_str(), c).is_some() {
            diags.push(Diagnostic::error(
                DiagCode::DuplicateName,
                &c.name,
                format!("cell `{}` declared more than once", c.name),
            ));
        }
        if c.kind.uses_delay() && c.config.delay_fs == 0 {
            diags.push(Diagnostic::error(
                DiagCode::NonPositiveDelay,
                &c.name,
                format!("{} `{}` has zero delay", c.kind, c.name),
            ));
        }
    }

    let mut drivers: HashMap<&Endpoint, usize> = HashMap::new();
    let mut sinks: HashMap<&Endpoint, usize> = HashMap::new();
    for net in &design.nets {
        *drivers.entry(&net.driver).or_default() += 1;
        *sinks.entry(&net.sink).or_default() += 1;

        if let (Endpoint::External(a), Endpoint::External(b)) = (&net.driver, &net.sink) {
            diags.push(Diagnostic::error(
                DiagCode::WrongDirection,
                format!("{a} -> {b}"),
                "a net cannot join two external ports",
            ));
            continue;
        }

        for (end, is_driver) in [(&net.driver, true), (&net.sink, false)] {
            match end {
                Endpoint::External(_) => {}
                Endpoint::Pin(pin) => match cells.get(pin.cell.as_str()) {
                    None => diags.push(Diagnostic::error(
                        DiagCode::UnknownCell,
                        pin.to_string(),
                        format!("net references undeclared cell `{}`", pin.cell),
                    )),
                    Some(cell) if !cell.kind.has_port(pin.port) => diags.push(Diagnostic::error(
                        DiagCode::UnknownPort,
                        pin.to_string(),
                        format!("{} has no port {}", cell.kind, pin.port),
                    )),
                    Some(cell) => {
                        let ok = if is_driver {
                            cell.kind.has_output(pin.port)
                        } else {
                            cell.kind.has_input(pin.port)
                        };
                        if !ok {
                            let role = if is_driver { "drive" } else { "sink" };
                            diags.push(Diagnostic::error(
                                DiagCode::WrongDirection,
                                pin.to_string(),
                                format!("{} {} cannot {role} a net", cell.kind, pin.port),
                            ));
                        }
                    }
                },
            }
        }
    }

    let ext_inputs: HashSet<&str> = design.inputs().collect();
    let mut clashes: Vec<&str> = design
        .outputs()
        .filter(|o| ext_inputs.contains(o))
        .collect();
    clashes.sort();
    clashes.dedup();
    for name in clashes {
        diags.push(Diagnostic::error(
            DiagCode::DuplicateName,
            name,
            format!("external port `{name}` used as both input and output"),
        ));
    }

    let mut fanout: Vec<_> = drivers.iter().filter(|(_, &n)| n > 1).collect();
    fanout.sort();
    for (end, n) in fanout {
        diags.push(Diagnostic::error(
            DiagCode::FanoutWithoutSplitter,
            end.to_string(),
            format!("`{end}` drives {n} nets; fan-out needs a SPLIT cell"),
        ));
    }
    let mut multi: Vec<_> = sinks.iter().filter(|(_, &n)| n > 1).collect();
    multi.sort();
    for (end, n) in multi {
        diags.push(Diagnostic::error(
            DiagCode::MultiplyDrivenInput,
            end.to_string(),
            format!("`{end}` is driven by {n} nets; fan-in needs a MERGE cell"),
        ));
    }

    for c in &design.cells {
        for &port in c.kind.inputs() {
            let end = Endpoint::Pin(super::Pin::new(c.name.clone(), port));
            if !sinks.contains_key(&end) {
                diags.push(Diagnostic::warning(
                    DiagCode::UnconnectedInput,
                    end.to_string(),
                    format!("{} input {} is not driven", c.kind, port),
                ));
            }
        }
        for &port in c.kind.outputs() {
            let end = Endpoint::Pin(super::Pin::new(c.name.clone(), port));
            if !drivers.contains_key(&end) {
                diags.push(Diagnostic::warning(
                    DiagCode::UnconnectedOutput,
                    end.to_string(),
                    format!("{} output {} drives nothing; its pulses are dropped", c.kind, port),
                ));
            }
        }
    }

    diags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_design;
    use crate::netlist::Severity;

    fn errors(text: &str) -> Vec<DiagCode> {
        check_design(&parse_design(text).unwrap())
            .into_iter()
            .filter(|d| d.is_error())
            .map(|d| d.code)
            .collect()
    }

    #[test]
    fn clean_chain_has_no_diagnostics() {
        let d = parse_design("cell JTL j\ninput X -> j.IN\noutput j.OUT -> Y").unwrap();
        assert!(check_design(&d).is_empty());
    }

    #[test]
    fn fanout_without_splitter() {
        let text = "cell JTL j\ncell SINK a\ncell SINK b\ninput X -> j.IN\nnet j.OUT -> a.IN\nnet j.OUT -> b.IN";
        assert_eq!(errors(text), vec![DiagCode::FanoutWithoutSplitter]);
    }

    #[test]
    fn multiply_driven_input() {
        let text = "cell JTL a\ncell JTL b\ncell SINK s\ninput X -> a.IN\ninput Z -> b.IN\nnet a.OUT -> s.IN\nnet b.OUT -> s.IN";
        assert_eq!(errors(text), vec![DiagCode::MultiplyDrivenInput]);
    }

    #[test]
    fn unconnected_sink_only_warns() {
        let d = parse_design("cell SINK s").unwrap();
        let diags = check_design(&d);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert_eq!(diags[0].code, DiagCode::UnconnectedInput);
    }

    #[test]
    fn half_connected_merge_warns() {
        let d = parse_design("cell MERGE m\ncell SINK s\ninput X -> m.A\nnet m.OUT -> s.IN").unwrap();
        let diags = check_design(&d);
        assert!(!has_errors(&diags));
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].location, "m.B");
    }

    #[test]
    fn structural_loops_are_legal() {
        let text = "cell MERGE m\ncell SPLIT s\ncell SINK k\ninput X -> m.A\nnet m.OUT -> s.IN\nnet s.OUT1 -> m.B\nnet s.OUT2 -> k.IN";
        assert!(errors(text).is_empty());
    }

    #[test]
    fn unknown_references_and_direction() {
        assert_eq!(errors("input X -> ghost.IN"), vec![DiagCode::UnknownCell]);
        assert_eq!(
            errors("cell JTL a\ncell JTL b\nnet a.IN -> b.OUT"),
            vec![DiagCode::WrongDirection, DiagCode::WrongDirection]
        );
    }

    #[test]
    fn zero_delay_is_an_error() {
        assert_eq!(
            errors("cell JTL j delay_fs=0\ninput X -> j.IN\noutput j.OUT -> Y"),
            vec![DiagCode::NonPositiveDelay]
        );
        // SINK never emits, so its delay is irrelevant
        assert!(errors("cell SINK k delay_fs=0\ninput X -> k.IN").is_empty());
    }

    #[test]
    fn programmatic_duplicates() {
        use crate::cell::{CellConfig, CellKind};
        let mut d = Design::new();
        d.add_cell("j", CellKind::Jtl, CellConfig::default());
        d.add_cell("j", CellKind::Jtl, CellConfig::default());
        assert!(check_design(&d)
            .iter()
            .any(|x| x.code == DiagCode::DuplicateName));

        let mut d = Design::new();
        d.add_cell("a", CellKind::Jtl, CellConfig::default());
        d.input("P", super::super::Pin::new("a", crate::cell::Port::In));
        d.output(super::super::Pin::new("a", crate::cell::Port::Out), "P");
        assert!(check_design(&d)
            .iter()
            .any(|x| x.code == DiagCode::DuplicateName));
    }
}
