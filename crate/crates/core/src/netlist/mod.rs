//! Flat netlists: data model, text format and structural checks.
//!
//! SFQ wiring is point-to-point. Each net joins exactly one driver to
//! exactly one sink; fan-out goes through SPLIT cells and fan-in through
//! MERGE cells.

mod design;
mod drc;
mod parse;
mod print;

pub use design::{Cell, Design, Endpoint, Net, Pin};
pub use drc::{check_design, has_errors};
pub use parse::{parse_design, ParseError};
pub use print::print_design;

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiagCode {
    Syntax,
    UnknownKind,
    UnknownPort,
    DuplicateName,
    UnknownCell,
    WrongDirection,
    FanoutWithoutSplitter,
    MultiplyDrivenInput,
    UnconnectedInput,
    UnconnectedOutput,
    NonPositiveDelay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagCode,
    pub message: String,
    /// Cell, pin or external port name the diagnostic refers to.
    pub location: String,
    /// 1-based line and column, for diagnostics raised while parsing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<(usize, usize)>,
}

impl Diagnostic {
    pub fn error(code: DiagCode, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            location: location.into(),
            span: None,
        }
    }

    pub fn warning(code: DiagCode, location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, location, message)
        }
    }

    pub fn at(mut self, line: usize, column: usize) -> Self {
        self.span = Some((line, column));
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.span {
            Some((line, col)) => write!(
                f,
                "{sev}[{:?}] {}:{}: {} ({})",
                self.code, line, col, self.message, self.location
            ),
            None => write!(f, "{sev}[{:?}] {} ({})", self.code, self.message, self.location),
        }
    }
}
