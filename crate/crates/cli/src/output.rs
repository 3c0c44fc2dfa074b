//! CSV and summary emission.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use bergquant::report::BoundReport;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

impl Cell {
    /// Floats carry 17 significant digits.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_nan() => "nan".into(),
            Cell::Float(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

/// A monotonicity or stability observation. Reported always, fatal only
/// under `--strict`.
#[derive(Debug, Clone, Serialize)]
pub struct Trend {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Trend {
    pub fn new(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ok,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub checks: Vec<BoundReport>,
    pub trends: Vec<Trend>,
    pub info: Map<String, Value>,
}

impl Report {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
            checks: Vec::new(),
            trends: Vec::new(),
            info: Map::new(),
        }
    }

    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|r| r.pass)
    }

    pub fn trends_pass(&self) -> bool {
        self.trends.iter().all(|t| t.ok)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Serialize)]
pub struct Summary<'a> {
    pub subcommand: &'a str,
    pub seed: u64,
    pub strict: bool,
    pub pass: bool,
    pub checks_pass: bool,
    pub trends_pass: bool,
    pub csv: String,
    pub rows: usize,
    pub info: &'a Map<String, Value>,
    pub checks: &'a [BoundReport],
    pub trends: &'a [Trend],
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_cells_have_17_digits() {
        assert_eq!(Cell::Float(0.1).render(), "1.0000000000000001e-1");
        assert_eq!(Cell::Float(-2.0).render(), "-2.0000000000000000e0");
        assert_eq!(Cell::Missing.render(), "");
        let x = std::f64::consts::PI;
        assert_eq!(Cell::Float(x).render().parse::<f64>().unwrap(), x);
    }
}
