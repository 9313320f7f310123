//! CSV and JSON rendering. Both carry the schema version and the resolved
//! configuration; CSV puts them in `#` comment lines ahead of the header row.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:?}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Structured rows for JSON; built from `columns` and `rows` when absent.
    pub json_rows: Option<Vec<Value>>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self { command, columns: columns.to_vec(), rows: Vec::new(), json_rows: None }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, rc: &RunConfig) -> String {
        let mut out = String::new();
        out.push_str(&format!("# schema_version: {SCHEMA_VERSION}\n"));
        out.push_str(&format!("# command: {}\n", self.command));
        out.push_str(&format!("# config: {}\n", rc.echo()));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, rc: &RunConfig) -> String {
        let rows = self.json_rows.clone().unwrap_or_else(|| {
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect()
        });
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": rc.echo(),
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable document");
        s.push('\n');
        s
    }

    pub fn render(&self, rc: &RunConfig) -> String {
        match rc.format {
            Format::Csv => self.to_csv(rc),
            Format::Json => self.to_json(rc),
        }
    }

    /// Writes to `rc.output`, or stdout when unset.
    pub fn write(&self, rc: &RunConfig) -> CliResult<()> {
        let text = self.render(rc);
        match &rc.output {
            Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output {
                path: path.display().to_string(),
                message: e.to_string(),
            }),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Output { path: "stdout".into(), message: e.to_string() })
            }
        }
    }
}
