//! Result tables and their CSV / JSON renderings.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    /// CSV field: floats with 17 significant digits, `.` as decimal mark.
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::csv))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(r.iter().map(Cell::json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// What a subcommand produced: rows, a summary object, and the asserted
/// invariants that failed (each naming its residual).
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub summary: Map<String, Value>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Self {
            table,
            summary: Map::new(),
            failures: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl serde::Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.insert(key.to_string(), v);
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the report. JSON output is one object holding the manifest, the
/// summary and the rows; CSV output holds only the rows, with the manifest
/// in a `<out>.manifest.json` sidecar (or on stderr for standard output).
pub fn emit(
    report: &Report,
    manifest: &Value,
    format: Format,
    out: Option<&Path>,
) -> io::Result<()> {
    let head = json!({ "manifest": manifest, "summary": report.summary });
    match format {
        Format::Json => {
            let mut doc = head;
            doc["rows"] = report.table.to_json();
            let mut text = serde_json::to_vec_pretty(&doc)?;
            text.push(b'\n');
            write_to(out, &text)
        }
        Format::Csv => {
            let csv = report.table.to_csv()?;
            match out {
                Some(path) => {
                    write_to(Some(path), &csv)?;
                    let mut text = serde_json::to_vec_pretty(&head)?;
                    text.push(b'\n');
                    fs::write(sidecar_path(path), text)
                }
                None => {
                    eprintln!("# {}", serde_json::to_string(&head)?);
                    write_to(None, &csv)
                }
            }
        }
    }
}

fn write_to(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_digits() {
        let mut t = Table::new(&["name", "x", "k"]);
        t.push(row!["a,b", 0.1, Some(3usize)]);
        t.push(row!["plain", -2.5e-9, None::<usize>]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(
            s,
            "name,x,k\n\"a,b\",1.0000000000000001e-1,3\nplain,-2.5000000000000001e-9,\n"
        );
    }

    #[test]
    fn json_rows_are_objects() {
        let mut t = Table::new(&["k", "v"]);
        t.push(row![1usize, f64::NAN]);
        assert_eq!(t.to_json(), json!([{ "k": 1, "v": null }]));
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(
            sidecar_path(Path::new("out/a.csv")),
            PathBuf::from("out/a.csv.manifest.json")
        );
    }
}
