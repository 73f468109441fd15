use std::collections::HashSet;
use std::fmt;

use crate::cell::{CellConfig, CellKind, Port};

use super::design::{Design, Pin};
use super::{DiagCode, Diagnostic};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    col: s + 1,
                });
            }
        } else if start.is_none() {
            if ch == '#' {
                return out;
            }
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            col: s + 1,
        });
    }
    out
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

struct PendingPin {
    pin: Pin,
    line: usize,
    col: usize,
}

struct Parser {
    design: Design,
    diags: Vec<Diagnostic>,
    pins: Vec<PendingPin>,
    cell_lines: Vec<(usize, usize)>,
    externals: HashSet<String>,
}

impl Parser {
    fn syntax(&mut self, line: usize, col: usize, msg: impl Into<String>) {
        self.diags
            .push(Diagnostic::error(DiagCode::Syntax, format!("line {line}"), msg).at(line, col));
    }

    fn name(&mut self, line: usize, tok: Token<'_>) -> Option<String> {
        if valid_name(tok.text) {
            Some(tok.text.to_string())
        } else {
            self.syntax(line, tok.col, format!("invalid identifier `{}`", tok.text));
            None
        }
    }

    fn pin(&mut self, line: usize, tok: Token<'_>) -> Option<Pin> {
        let Some((cell, port)) = tok.text.rsplit_once('.') else {
            self.syntax(line, tok.col, format!("expected <cell>.<PORT>, found `{}`", tok.text));
            return None;
        };
        if !valid_name(cell) {
            self.syntax(line, tok.col, format!("invalid cell name `{cell}`"));
            return None;
        }
        match port.parse::<Port>() {
            Ok(port) => {
                let pin = Pin::new(cell, port);
                self.pins.push(PendingPin {
                    pin: pin.clone(),
                    line,
                    col: tok.col,
                });
                Some(pin)
            }
            Err(_) => {
                self.diags.push(
                    Diagnostic::error(
                        DiagCode::UnknownPort,
                        tok.text,
                        format!("unknown port `{port}`"),
                    )
                    .at(line, tok.col + cell.len() + 1),
                );
                None
            }
        }
    }

    fn external(&mut self, line: usize, tok: Token<'_>) -> Option<String> {
        let name = self.name(line, tok)?;
        if !self.externals.insert(name.clone()) {
            self.diags.push(
                Diagnostic::error(
                    DiagCode::DuplicateName,
                    &name,
                    format!("external port `{name}` declared twice"),
                )
                .at(line, tok.col),
            );
        }
        Some(name)
    }

    fn uint(&mut self, line: usize, tok: Token<'_>, value: &str) -> Option<u64> {
        match value.parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.syntax(line, tok.col, format!("expected unsigned integer in `{}`", tok.text));
                None
            }
        }
    }

    fn arrow(&mut self, line: usize, toks: &[Token<'_>], at: usize) -> bool {
        match toks.get(at) {
            Some(t) if t.text == "->" => true,
            Some(t) => {
                self.syntax(line, t.col, format!("expected `->`, found `{}`", t.text));
                false
            }
            None => {
                self.syntax(line, 1, "expected `->`");
                false
            }
        }
    }

    fn cell_line(&mut self, line: usize, toks: &[Token<'_>]) {
        if toks.len() < 3 {
            self.syntax(line, toks[0].col, "expected `cell <KIND> <name>`");
            return;
        }
        let kind = match toks[1].text.parse::<CellKind>() {
            Ok(k) => k,
            Err(e) => {
                self.diags.push(
                    Diagnostic::error(DiagCode::UnknownKind, toks[2].text, e.to_string())
                        .at(line, toks[1].col),
                );
                return;
            }
        };
        let Some(name) = self.name(line, toks[2]) else {
            return;
        };
        let mut config = CellConfig::default();
        for &tok in &toks[3..] {
            match tok.text.split_once('=') {
                Some(("delay_fs", v)) => {
                    if let Some(d) = self.uint(line, tok, v) {
                        config.delay_fs = d;
                    }
                }
                Some(("faulty", "0")) => config.faulty = false,
                Some(("faulty", "1")) => config.faulty = true,
                _ => self.syntax(line, tok.col, format!("unexpected cell attribute `{}`", tok.text)),
            }
        }
        self.cell_lines.push((line, toks[2].col));
        self.design.add_cell(name, kind, config);
    }

    fn net_line(&mut self, line: usize, toks: &[Token<'_>]) {
        if toks.len() < 4 || !self.arrow(line, toks, 2) {
            if toks.len() < 4 {
                self.syntax(line, toks[0].col, "expected `net <cell.PORT> -> <cell.PORT>`");
            }
            return;
        }
        let driver = self.pin(line, toks[1]);
        let sink = self.pin(line, toks[3]);
        let mut wire_delay_fs = 0;
        for &tok in &toks[4..] {
            match tok.text.split_once('=') {
                Some(("wire_delay_fs", v)) => {
                    if let Some(d) = self.uint(line, tok, v) {
                        wire_delay_fs = d;
                    }
                }
                _ => self.syntax(line, tok.col, format!("unexpected net attribute `{}`", tok.text)),
            }
        }
        if let (Some(d), Some(s)) = (driver, sink) {
            self.design.connect_delayed(d, s, wire_delay_fs);
        }
    }

    fn input_line(&mut self, line: usize, toks: &[Token<'_>]) {
        if toks.len() != 4 {
            self.syntax(line, toks[0].col, "expected `input <Name> -> <cell.PORT>`");
            return;
        }
        if !self.arrow(line, toks, 2) {
            return;
        }
        let name = self.external(line, toks[1]);
        let sink = self.pin(line, toks[3]);
        if let (Some(n), Some(s)) = (name, sink) {
            self.design.input(n, s);
        }
    }

    fn output_line(&mut self, line: usize, toks: &[Token<'_>]) {
        if toks.len() != 4 {
            self.syntax(line, toks[0].col, "expected `output <cell.PORT> -> <Name>`");
            return;
        }
        if !self.arrow(line, toks, 2) {
            return;
        }
        let driver = self.pin(line, toks[1]);
        let name = self.external(line, toks[3]);
        if let (Some(d), Some(n)) = (driver, name) {
            self.design.output(d, n);
        }
    }

    /// Checks that need every cell declared first.
    fn resolve(&mut self) {
        let mut seen = HashSet::new();
        for (cell, &(line, col)) in self.design.cells.iter().zip(&self.cell_lines) {
            if !seen.insert(cell.name.as_str()) {
                self.diags.push(
                    Diagnostic::error(
                        DiagCode::DuplicateName,
                        &cell.name,
                        format!("cell `{}` declared twice", cell.name),
                    )
                    .at(line, col),
                );
            }
        }
        for p in &self.pins {
            if let Some(cell) = self.design.cell(&p.pin.cell) {
                if !cell.kind.has_port(p.pin.port) {
                    self.diags.push(
                        Diagnostic::error(
                            DiagCode::UnknownPort,
                            p.pin.to_string(),
                            format!("{} has no port {}", cell.kind, p.pin.port),
                        )
                        .at(p.line, p.col),
                    );
                }
            }
        }
    }
}

/// Parse the line-oriented netlist format.
///
/// References to undeclared cells are not parse errors; [`check_design`]
/// reports them. Ports of declared cells are validated against the kind.
///
/// [`check_design`]: super::check_design
pub fn parse_design(text: &str) -> Result<Design, ParseError> {
    let mut p = Parser {
        design: Design::new(),
        diags: Vec::new(),
        pins: Vec::new(),
        cell_lines: Vec::new(),
        externals: HashSet::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw);
        let Some(first) = toks.first() else {
            continue;
        };
        match first.text {
            "cell" => p.cell_line(line, &toks),
            "net" => p.net_line(line, &toks),
            "input" => p.input_line(line, &toks),
            "output" => p.output_line(line, &toks),
            other => p.syntax(line, first.col, format!("unknown statement `{other}`")),
        }
    }
    p.resolve();
    if p.diags.is_empty() {
        Ok(p.design)
    } else {
        Err(ParseError { diagnostics: p.diags })
    }
}
