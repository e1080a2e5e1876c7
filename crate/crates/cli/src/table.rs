//! Tabular command output in CSV or JSON.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::experiment::ExperimentSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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

/// Twelve significant digits, the CSV number format.
pub fn format_num(v: f64) -> String {
    format!("{v:.11e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_num(*v),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // shortest round-trip representation; non-finite values become null
            Cell::Num(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self, spec: &ExperimentSpec) -> Value {
        let rows: Vec<Value> = self.rows.iter().map(|row| Value::Array(row.iter().map(Cell::json).collect())).collect();
        json!({ "spec": spec, "columns": self.columns, "rows": rows })
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[i] {
                    Cell::Num(v) => *v,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

/// Parsed CSV produced by [`Table::write_csv`].
pub fn parse_csv(text: &str) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines();
    let header = lines.next()?.split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    Some((header, rows))
}

/// Serializes any value as pretty JSON with a trailing newline.
pub fn write_json(value: &impl Serialize, mut w: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_printed_values() {
        let mut t = Table::new(["p", "g"]);
        for v in [0.1, 1.0 / 3.0, 123456.789, 1e-300, -2.5e12] {
            t.push(vec![v.into(), (v * 7.0).into()]);
        }
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (_, rows) = parse_csv(&text).unwrap();
        for (row, orig) in rows.iter().zip(&t.rows) {
            for (s, c) in row.iter().zip(orig) {
                let parsed: f64 = s.parse().unwrap();
                assert_eq!(format_num(parsed), *s);
                if let Cell::Num(v) = c {
                    assert!((parsed - v).abs() <= 1e-11 * v.abs());
                }
            }
        }
    }

    #[test]
    fn text_cells_are_quoted() {
        assert_eq!(Cell::from("a,b").csv(), "\"a,b\"");
        assert_eq!(Cell::from("ab").csv(), "ab");
    }
}
