//! Column-oriented time-series tables and their CSV/JSON forms.
//!
//! CSV files start with `# key = value` metadata lines, then a header row.
//! Floats are written with 17 significant digits so they read back exactly.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Num(Vec<f64>),
    Text(Vec<String>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Num(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            ColumnData::Num(v) => fmt_float(v[row]),
            ColumnData::Text(v) => v[row].clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<(String, ColumnData)>,
}

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl Table {
    pub fn push_meta(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn push_num(&mut self, name: &str, values: Vec<f64>) {
        self.columns.push((name.to_string(), ColumnData::Num(values)));
    }

    pub fn push_text(&mut self, name: &str, values: Vec<String>) {
        self.columns.push((name.to_string(), ColumnData::Text(values)));
    }

    pub fn column(&self, name: &str) -> Option<&ColumnData> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn num(&self, name: &str) -> Option<&[f64]> {
        match self.column(name) {
            Some(ColumnData::Num(v)) => Some(v),
            _ => None,
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, c)| c.len())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns.iter().map(|(n, _)| n.as_str()))?;
        for row in 0..self.rows() {
            w.write_record(self.columns.iter().map(|(_, c)| c.cell(row)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let columns: Map<String, Value> = self
            .columns
            .iter()
            .map(|(n, c)| {
                let arr = match c {
                    ColumnData::Num(v) => v.iter().map(|x| json_number(*x)).collect(),
                    ColumnData::Text(v) => v.iter().map(|s| Value::String(s.clone())).collect(),
                };
                (n.clone(), Value::Array(arr))
            })
            .collect();
        serde_json::json!({ "meta": meta, "columns": columns })
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.to_json())?;
                writeln!(out)?;
                Ok(())
            }
        }
    }

    pub fn read_csv(path: &Path) -> Result<Table, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut table = Table::default();
        for line in text.lines().filter(|l| l.starts_with('#')) {
            if let Some((k, v)) = line[1..].split_once('=') {
                table.push_meta(k.trim(), v.trim());
            }
        }
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); header.len()];
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != header.len() {
                return Err(CliError::Config(format!(
                    "{}: data row {} has {} fields, header has {}",
                    path.display(),
                    line + 1,
                    record.len(),
                    header.len()
                )));
            }
            for (col, field) in record.iter().enumerate() {
                cells[col].push(field.trim().to_string());
            }
        }
        for (name, raw) in header.into_iter().zip(cells) {
            let parsed: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
            match parsed {
                Some(v) if !raw.is_empty() => table.push_num(&name, v),
                _ => table.push_text(&name, raw),
            }
        }
        Ok(table)
    }
}

/// Writes to `path`, or standard output when absent.
pub fn emit(table: &Table, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", p.display())))?;
            let mut buf = std::io::BufWriter::new(file);
            table.write(format, &mut buf)?;
            buf.flush()?;
            Ok(())
        }
        None => table.write(format, std::io::stdout().lock()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::default();
        t.push_meta("model", "test");
        let xs = vec![0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-300, -2.5e17, f64::NAN];
        t.push_num("x", xs.clone());
        t.push_text("flags", vec!["".into(), "pole".into(), "".into(), "capped|pole".into(), "".into()]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit(&t, Format::Csv, Some(&path)).unwrap();
        let back = Table::read_csv(&path).unwrap();
        assert_eq!(back.meta("model"), Some("test"));
        let ys = back.num("x").unwrap();
        for (a, b) in xs.iter().zip(ys) {
            assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
        }
        assert_eq!(back.column("flags"), t.column("flags"));
    }

    #[test]
    fn json_has_meta_and_columns() {
        let mut t = Table::default();
        t.push_meta("k", "v");
        t.push_num("x", vec![1.0, f64::NAN]);
        let v = t.to_json();
        assert_eq!(v["meta"]["k"], "v");
        assert_eq!(v["columns"]["x"][0], 1.0);
        assert!(v["columns"]["x"][1].is_null());
    }
}
