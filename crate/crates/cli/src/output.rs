use std::io::Write;

use serde_json::{Map, Value};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format!("{v:e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Real(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(v) => Value::String(v.clone()),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.to_string(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub config: Value,
    pub table: Table,
    pub fits: Map<String, Value>,
    /// Checks go into the JSON document; in CSV mode the table already holds them.
    pub checks: Table,
}

pub fn render(report: &Report, format: Format) -> anyhow::Result<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.table.header)?;
            for row in &report.table.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            Ok(w.into_inner()?)
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("config".into(), report.config.clone());
            doc.insert("rows".into(), report.table.json_rows());
            doc.insert("fits".into(), Value::Object(report.fits.clone()));
            doc.insert("checks".into(), report.checks.json_rows());
            let mut out = serde_json::to_vec_pretty(&Value::Object(doc))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn emit(bytes: &[u8], path: Option<&std::path::Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}
