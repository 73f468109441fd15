use std::fmt;

use serde::Serialize;

use crate::cell::{CellConfig, CellKind, Port};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pin {
    pub cell: String,
    pub port: Port,
}

impl Pin {
    pub fn new(cell: impl Into<String>, port: Port) -> Pin {
        Pin {
            cell: cell.into(),
            port,
        }
    }
}

impl fmt::Display for Pin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.cell, self.port)
    }
}

/// One end of a net: a cell pin or a named external port.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Endpoint {
    Pin(Pin),
    External(String),
}

impl Endpoint {
    pub fn pin(&self) -> Option<&Pin> {
        match self {
            Endpoint::Pin(p) => Some(p),
            Endpoint::External(_) => None,
        }
    }

    pub fn external(&self) -> Option<&str> {
        match self {
            Endpoint::External(name) => Some(name),
            Endpoint::Pin(_) => None,
        }
    }
}

impl From<Pin> for Endpoint {
    fn from(p: Pin) -> Self {
        Endpoint::Pin(p)
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Pin(p) => p.fmt(f),
            Endpoint::External(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Net {
    pub driver: Endpoint,
    pub sink: Endpoint,
    pub wire_delay_fs: u64,
}

impl Net {
    /// Display name: the driving pin, or the external input name.
    pub fn name(&self) -> String {
        self.driver.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub name: String,
    pub kind: CellKind,
    pub config: CellConfig,
}

/// A flat SFQ netlist.
///
/// `Design` is deliberately permissive: it can represent dangling or
/// doubly-driven pins so that [`check_design`](super::check_design) has
/// something to report. Compile it through the kernel to simulate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Design {
    pub cells: Vec<Cell>,
    pub nets: Vec<Net>,
}

impl Design {
    pub fn new() -> Design {
        Design::default()
    }

    pub fn add_cell(&mut self, name: impl Into<String>, kind: CellKind, config: CellConfig) -> String {
        let name = name.into();
        self.cells.push(Cell {
            name: name.clone(),
            kind,
            config,
        });
        name
    }

    pub fn connect(&mut self, driver: impl Into<Endpoint>, sink: impl Into<Endpoint>) {
        self.connect_delayed(driver, sink, 0);
    }

    pub fn connect_delayed(
        &mut self,
        driver: impl Into<Endpoint>,
        sink: impl Into<Endpoint>,
        wire_delay_fs: u64,
    ) {
        self.nets.push(Net {
            driver: driver.into(),
            sink: sink.into(),
            wire_delay_fs,
        });
    }

    pub fn input(&mut self, name: impl Into<String>, sink: Pin) {
        self.connect(Endpoint::External(name.into()), sink);
    }

    pub fn output(&mut self, driver: Pin, name: impl Into<String>) {
        self.connect(driver, Endpoint::External(name.into()));
    }

    pub fn cell(&self, name: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.name == name)
    }

    pub fn cell_mut(&mut self, name: &str) -> Option<&mut Cell> {
        self.cells.iter_mut().find(|c| c.name == name)
    }

    /// External input names in net order.
    pub fn inputs(&self) -> impl Iterator<Item = &str> {
        self.nets.iter().filter_map(|n| n.driver.external())
    }

    /// External output names in net order.
    pub fn outputs(&self) -> impl Iterator<Item = &str> {
        self.nets.iter().filter_map(|n| n.sink.external())
    }

    pub fn net_driven_by(&self, driver: &Endpoint) -> Option<usize> {
        self.nets.iter().position(|n| &n.driver == driver)
    }

    /// Copy with cells sorted by name and nets sorted by (driver, sink).
    /// Two designs are structurally equal when their normalized forms are.
    pub fn normalized(&self) -> Design {
        let mut d = self.clone();
        d.cells.sort_by(|a, b| a.name.cmp(&b.name));
        d.nets
            .sort_by(|a, b| (&a.driver, &a.sink).cmp(&(&b.driver, &b.sink)));
        d
    }

    pub fn structurally_eq(&self, other: &Design) -> bool {
        self.normalized() == other.normalized()
    }
}
