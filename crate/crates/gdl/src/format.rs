//! CSV and JSON emission.
//!
//! Every CSV starts with `#key=value` metadata lines, then an RFC 4180 header
//! and rows. Float columns come in pairs: the shortest round-trip decimal and
//! a `_hex` column with the IEEE-754 bit pattern.

use std::io::Write;

use anyhow::{Context, Result};
use serde::Serialize;

/// Bumped when a column layout changes.
pub const SCHEMA_VERSION: u32 = 1;

pub fn version_line() -> String {
    format!("gdl {} schema {}", env!("CARGO_PKG_VERSION"), SCHEMA_VERSION)
}

/// Bit pattern of `x` as 16 lowercase hex digits.
pub fn hex(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

pub fn parse_hex(s: &str) -> Result<f64> {
    let bits = u64::from_str_radix(s, 16).with_context(|| format!("bad hex float {s:?}"))?;
    Ok(f64::from_bits(bits))
}

/// Shortest decimal that parses back to `x`, in exponent form when tiny or huge.
pub fn decimal(x: f64) -> String {
    format!("{x:?}")
}

/// Metadata block written above a CSV header.
#[derive(Debug, Clone)]
pub struct Meta {
    entries: Vec<(String, String)>,
}

impl Meta {
    pub fn new(model: &str, seed: u64) -> Self {
        Meta {
            entries: vec![
                ("version".into(), version_line()),
                ("model".into(), model.into()),
                ("seed".into(), seed.to_string()),
            ],
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    /// A float entry plus its `_hex` twin.
    pub fn float(self, key: &str, x: f64) -> Self {
        self.with(key, decimal(x)).with(&format!("{key}_hex"), hex(x))
    }

    fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(out, "#{k}={v}")?;
        }
        Ok(())
    }
}

/// A CSV table assembled in memory. Float cells expand to two columns.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    Float(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Column kinds, so the header knows which names get a `_hex` twin.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Col {
    Float,
    Text,
}

impl Table {
    pub fn new(columns: &[(&str, Col)]) -> Self {
        let mut header = Vec::new();
        for (name, kind) in columns {
            header.push(name.to_string());
            if *kind == Col::Float {
                header.push(format!("{name}_hex"));
            }
        }
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        let mut row = Vec::with_capacity(self.header.len());
        for c in cells {
            match c {
                Cell::Float(x) => {
                    row.push(decimal(x));
                    row.push(hex(x));
                }
                Cell::Text(s) => row.push(s),
            }
        }
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, meta: &Meta, out: &mut impl Write) -> Result<()> {
        meta.write_to(out)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// JSON document holding the metadata entries and the report.
pub fn write_json<T: Serialize>(meta: &Meta, value: &T, out: &mut impl Write) -> Result<()> {
    let mut doc = serde_json::Map::new();
    for (k, v) in &meta.entries {
        doc.insert(k.clone(), serde_json::Value::String(v.clone()));
    }
    doc.insert("report".into(), serde_json::to_value(value)?);
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}
