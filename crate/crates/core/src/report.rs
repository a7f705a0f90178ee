//! Report emission: deterministic JSON and long-format CSV tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::ends::EndClassification;
use crate::error::{Error, Result};
use crate::harmonic::{DecayRow, GreenLimitReport};

/// CSV significant digits.
pub const CSV_DIGITS: usize = 12;

/// Format with 12 significant digits, using the shortest decimal for the rounded value.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", CSV_DIGITS - 1, x).parse().unwrap();
    let s = if rounded != 0.0 && !(1e-6..1e16).contains(&rounded.abs()) { format!("{rounded:e}") } else { format!("{rounded}") };
    if s == "-0" { "0".into() } else { s }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_number(*x),
            Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
        }
    }
}

/// Column-named table rendered as CSV.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

pub fn decay_table(rows: &[DecayRow]) -> Table {
    let mut t = Table::new(&["r", "max_gamma", "max_edge_grad"]);
    for r in rows {
        t.push(vec![r.r.into(), r.max_gamma.into(), r.max_edge_grad.into()]);
    }
    t
}

pub fn barrier_table(c: &EndClassification) -> Table {
    let mut t = Table::new(&["rho", "sentinel_id", "value"]);
    for r in &c.barrier_trace {
        t.push(vec![r.rho.into(), r.sentinel.clone().into(), r.value.into()]);
    }
    t
}

pub fn green_table(rep: &GreenLimitReport) -> Table {
    let mut t = Table::new(&["rho", "vertex", "value"]);
    for row in &rep.rows {
        for (v, &x) in &row.values {
            t.push(vec![row.rho.into(), v.clone().into(), x.into()]);
        }
    }
    t
}

/// Pretty JSON with a trailing newline; field order follows the type definitions.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| with_path(e, dir))?;
    }
    std::fs::write(path, text).map_err(|e| with_path(e, path))
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
