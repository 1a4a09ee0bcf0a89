use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Run-level facts such as the spectrum cutoff, emitted as a trailing
    /// `# key: value` comment in CSV and under `metadata` in JSON.
    pub footer: Vec<(&'static str, Value)>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &'static str, value: impl Serialize) {
        self.footer
            .push((key, serde_json::to_value(value).expect("footer serializes")));
    }
}

/// Shortest decimal that parses back to the same f64. Plain notation in the
/// everyday range, exponent notation outside it.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn csv_field(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_value(cell: &Cell) -> Value {
    match cell {
        Cell::Int(v) => json!(v),
        Cell::Float(v) => json!(v),
        Cell::Text(s) => json!(s),
        Cell::Empty => Value::Null,
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns).map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row.iter().map(csv_field))
            .map_err(csv_error)?;
    }
    let mut out = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    for (key, value) in &table.footer {
        writeln!(out, "# {key}: {value}")?;
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(io),
        other => CliError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub fn write_json<W: Write>(
    table: &Table,
    command: &str,
    cfg: &RunConfig,
    mut out: W,
) -> Result<(), CliError> {
    let records: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(c, cell)| (c.to_string(), json_value(cell)))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut metadata = Map::new();
    metadata.insert("command".into(), json!(command));
    metadata.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    metadata.insert(
        "config".into(),
        serde_json::to_value(cfg).expect("config serializes"),
    );
    for (key, value) in &table.footer {
        metadata.insert(key.to_string(), value.clone());
    }
    let doc = json!({ "metadata": metadata, "records": records });
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::Io(e.into()))?;
    writeln!(out)?;
    Ok(())
}

pub fn emit(table: &Table, command: &str, cfg: &RunConfig) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match cfg.output.format {
        Format::Csv => write_csv(table, &mut buf)?,
        Format::Json => write_json(table, command, cfg, &mut buf)?,
    }
    match &cfg.output.path {
        Some(path) => std::fs::write(path, buf)?,
        None => std::io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}
