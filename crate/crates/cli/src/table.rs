//! Ordered tables written as CSV (with a leading `#` comment line) or JSON.

use std::io::Write;

use serde_json::{json, Value};

use crate::config::Format;
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // non-finite values have no JSON form
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Shortest round-trip form; exponent notation for very small or large
/// magnitudes.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub struct Table {
    pub command: &'static str,
    pub units: String,
    pub config_hash: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra top-level entries for the JSON form.
    pub extra: Vec<(&'static str, Value)>,
}

impl Table {
    pub fn new(command: &'static str, units: impl Into<String>, config_hash: String, columns: &[&'static str]) -> Self {
        Self {
            command,
            units: units.into(),
            config_hash,
            columns: columns.to_vec(),
            rows: Vec::new(),
            extra: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        writeln!(out, "# desitter {}; units: {}; config_sha256={}", self.command, self.units, self.config_hash)?;
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CliError::Io(e.into());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let mut doc = serde_json::Map::new();
        doc.insert("command".into(), json!(self.command));
        doc.insert("units".into(), json!(self.units));
        doc.insert("config_sha256".into(), json!(self.config_hash));
        for (k, v) in &self.extra {
            doc.insert((*k).into(), v.clone());
        }
        doc.insert("columns".into(), json!(self.columns));
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        doc.insert("rows".into(), Value::Array(rows));
        serde_json::to_writer_pretty(&mut *out, &Value::Object(doc)).map_err(|e| CliError::Io(e.into()))?;
        writeln!(out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("kernel", "t in 1/H", "abc".into(), &["r", "flag", "note"]);
        t.push(vec![0.25.into(), true.into(), Cell::Empty]);
        t.push(vec![1e-9.into(), false.into(), "x,y".into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write(Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# desitter kernel; units: t in 1/H; config_sha256=abc");
        assert_eq!(lines[1], "r,flag,note");
        assert_eq!(lines[2], "0.25,true,");
        assert_eq!(lines[3], "1e-9,false,\"x,y\"");
    }

    #[test]
    fn json_layout() {
        let mut buf = Vec::new();
        sample().write(Format::Json, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["config_sha256"], "abc");
        assert_eq!(v["rows"][0][2], Value::Null);
        assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    }
}
