//! Machine-readable row output: CSV (RFC 4180) and JSON Lines.
//!
//! Both writers share one scalar model so a sweep emits the same data under
//! either format. Floats are rendered with Rust's shortest round-trip
//! formatting; non-finite values are written as explicit `inf` / `-inf` /
//! `nan` markers (as bare strings in JSON, which has no spelling for them)
//! so divergent sweep points are visible instead of silently dropped.

use std::fmt::Write as _;
use std::io::{self, Write};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_owned())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown format '{other}' (expected csv or jsonl)")),
        }
    }
}

/// A fully materialized result table; rows must all match `columns` in
/// length.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| (*c).to_owned()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }
}

fn float_marker(v: f64) -> Option<&'static str> {
    if v.is_nan() {
        Some("nan")
    } else if v == f64::INFINITY {
        Some("inf")
    } else if v == f64::NEG_INFINITY {
        Some("-inf")
    } else {
        None
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

fn value_as_plain(v: &Value) -> String {
    match v {
        Value::Float(x) => match float_marker(*x) {
            Some(marker) => marker.to_owned(),
            // `{}` on f64 is the shortest string that round-trips.
            None => format!("{x}"),
        },
        Value::Int(i) => format!("{i}"),
        Value::Text(s) => s.clone(),
    }
}

fn value_as_json(v: &Value) -> String {
    match v {
        Value::Float(x) => match float_marker(*x) {
            Some(marker) => format!("\"{marker}\""),
            None => format!("{x}"),
        },
        Value::Int(i) => format!("{i}"),
        Value::Text(s) => serde_json::to_string(s).expect("string serialization is infallible"),
    }
}

pub fn write_csv(mut w: impl Write, table: &Table) -> io::Result<()> {
    let header: Vec<String> = table.columns.iter().map(|c| csv_escape(c)).collect();
    writeln!(w, "{}", header.join(","))?;
    for row in &table.rows {
        let mut line = String::new();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{}", csv_escape(&value_as_plain(v)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_jsonl(mut w: impl Write, table: &Table) -> io::Result<()> {
    for row in &table.rows {
        let mut line = String::from("{");
        for (i, (col, v)) in table.columns.iter().zip(row.iter()).enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(
                line,
                "{}:{}",
                serde_json::to_string(col).expect("string serialization is infallible"),
                value_as_json(v)
            );
        }
        line.push('}');
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_table(w: impl Write, table: &Table, format: Format) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(w, table),
        Format::Jsonl => write_jsonl(w, table),
    }
}
