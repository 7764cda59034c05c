//! Tabular outputs written as CSV and schema-versioned JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;
pub const HASH_PREFIX: &str = "# config_hash: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(u64),
    Float(Option<f64>),
    Bool(bool),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Cell {
        Cell::Str(s.into())
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Str(s) => csv_quote(s),
            Cell::Int(v) => v.to_string(),
            Cell::Float(Some(v)) if v.is_finite() => v.to_string(),
            Cell::Float(_) => String::new(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Str(s) => Value::String(s.clone()),
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => v.filter(|x| x.is_finite()).map_or(Value::Null, Value::from),
            Cell::Bool(b) => Value::Bool(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Cell {
        Cell::Float(Some(v))
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Cell {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Cell {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Cell {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Cell {
        Cell::Str(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Cell {
        Cell::Str(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: &'static str,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra top-level fields for the JSON form.
    pub extra: Vec<(&'static str, Value)>,
}

impl Table {
    pub fn new(kind: &'static str, columns: Vec<String>) -> Self {
        Table {
            kind,
            columns,
            rows: Vec::new(),
            extra: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self, hash: &str) -> String {
        let mut out = String::new();
        writeln!(out, "{HASH_PREFIX}{hash}").unwrap();
        let header: Vec<String> = self.columns.iter().map(|c| csv_quote(c)).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, hash: &str) -> String {
        let mut doc = serde_json::Map::new();
        doc.insert("schema_version".into(), OUTPUT_SCHEMA_VERSION.into());
        doc.insert("kind".into(), self.kind.into());
        doc.insert("config_hash".into(), hash.into());
        doc.insert("columns".into(), self.columns.clone().into());
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::to_json).collect())).collect();
        doc.insert("rows".into(), Value::Array(rows));
        for (k, v) in &self.extra {
            doc.insert((*k).into(), v.clone());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json serialises");
        s.push('\n');
        s
    }

    /// Write `<dir>/<stem>.csv` and/or `<dir>/<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str, format: OutputFormat, hash: &str) -> Result<Vec<PathBuf>, CliError> {
        let mut written = Vec::new();
        if format.csv() {
            let p = dir.join(format!("{stem}.csv"));
            write_file(&p, &self.to_csv(hash))?;
            written.push(p);
        }
        if format.json() {
            let p = dir.join(format!("{stem}.json"));
            write_file(&p, &self.to_json(hash))?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Parsed JSON table document.
#[derive(Debug, Clone, Deserialize)]
pub struct JsonTable {
    pub schema_version: u32,
    pub kind: String,
    pub config_hash: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.starts_with('#') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", vec!["name".into(), "value".into(), "ok".into()]);
        t.push(vec!["a,b".into(), 0.1.into(), true.into()]);
        t.push(vec!["c".into(), None.into(), false.into()]);
        t
    }

    #[test]
    fn csv_carries_hash_and_blanks() {
        let csv = sample().to_csv("abc");
        assert_eq!(csv, "# config_hash: abc\nname,value,ok\n\"a,b\",0.1,true\nc,,false\n");
    }

    #[test]
    fn json_is_versioned() {
        let doc: JsonTable = serde_json::from_str(&sample().to_json("abc")).unwrap();
        assert_eq!(doc.schema_version, OUTPUT_SCHEMA_VERSION);
        assert_eq!(doc.kind, "demo");
        assert_eq!(doc.config_hash, "abc");
        assert_eq!(doc.rows[1][1], Value::Null);
    }
}
