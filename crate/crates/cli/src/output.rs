//! Tabular output. Tables are rendered to a string in full before anything
//! touches the file system.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

use crate::config::Format;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.iter().map(|c| csv_text(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => format_float(*v),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => csv_text(s),
                    Cell::Empty => String::new(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let data: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Array(row.iter().map(cell_json).collect()))
            .collect();
        let mut obj = serde_json::Map::new();
        obj.insert("columns".into(), self.columns.clone().into());
        obj.insert("data".into(), Value::Array(data));
        let mut s = Value::Object(obj).to_string();
        s.push('\n');
        s
    }
}

fn cell_json(c: &Cell) -> Value {
    match c {
        // serde_json prints finite f64 in shortest round-trip form.
        Cell::Num(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
        Cell::Int(i) => (*i).into(),
        Cell::Text(s) => s.clone().into(),
        Cell::Empty => Value::Null,
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shortest decimal that parses back to the same `f64`. Very small and very
/// large magnitudes switch to exponent notation to keep fields short.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Write `text` to `path`, or to stdout when there is no path. A file that
/// was only partly written is removed.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
        Some(p) => write_file(p, text),
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Err(e) = fs::write(path, text) {
        let _ = fs::remove_file(path);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

/// `<path>.summary.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".summary.json");
    s.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 1e-7, 6.02e23, 123456.789, f64::MIN_POSITIVE, -1e-300] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_float(0.75), "0.75");
        assert_eq!(format_float(1e-7), "1e-7");
        assert_eq!(format_float(100.0), "100");
    }

    #[test]
    fn csv_and_json_layout() {
        let mut t = Table::new(vec!["a".into(), "err".into()]);
        t.push(vec![Cell::Num(0.5), Cell::Text("x, y".into())]);
        t.push(vec![Cell::Num(f64::NAN), Cell::Empty]);
        assert_eq!(t.to_csv(), "a,err\n0.5,\"x, y\"\nnan,\n");
        assert_eq!(t.to_json(), "{\"columns\":[\"a\",\"err\"],\"data\":[[0.5,\"x, y\"],[null,null]]}\n");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/run.csv")), Path::new("out/run.csv.summary.json"));
    }
}
