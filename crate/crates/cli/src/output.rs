use std::io::Write;

use serde_json::{json, Map, Value};

use crate::args::Format;

pub const TOOL: &str = concat!("relax ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits: round-trips every f64
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json!(x),
            Cell::Int(n) => json!(n),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

/// A command's result: header metadata plus a rectangular table.
#[derive(Debug, Default)]
pub struct Table {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub basis: Vec<String>,
    pub diagnostics: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// JSON-only payload (e.g. density matrices).
    pub extra: Option<Value>,
}

impl Table {
    pub fn new(command: &str) -> Self {
        Table {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn diagnostic(&mut self, key: &str, value: impl ToString) {
        self.diagnostics.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self, format: Format) -> std::io::Result<Vec<u8>> {
        match format {
            Format::Csv => self.csv(),
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json())?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }

    fn csv(&self) -> std::io::Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# tool: {TOOL}")?;
        writeln!(out, "# command: {}", self.command)?;
        for (k, v) in &self.params {
            writeln!(out, "# param {k}: {v}")?;
        }
        if !self.basis.is_empty() {
            writeln!(out, "# basis: {}", self.basis.join(","))?;
        }
        for (k, v) in &self.diagnostics {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }

    fn json(&self) -> Value {
        let pairs = |items: &[(String, String)]| {
            Value::Object(items.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>())
        };
        let mut obj = Map::new();
        obj.insert("tool".into(), json!(TOOL));
        obj.insert("command".into(), json!(self.command));
        obj.insert("parameters".into(), pairs(&self.params));
        obj.insert("basis".into(), json!(self.basis));
        obj.insert("diagnostics".into(), pairs(&self.diagnostics));
        obj.insert("columns".into(), json!(self.columns));
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        obj.insert("rows".into(), Value::Array(rows));
        if let Some(extra) = &self.extra {
            obj.insert("extra".into(), extra.clone());
        }
        Value::Object(obj)
    }
}

/// Key-value report, printed as `key: value` lines.
#[derive(Debug, Default)]
pub struct Report {
    pub entries: Vec<(String, Value)>,
}

impl Report {
    pub fn push(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.push((key.to_string(), value.into()));
    }

    pub fn render(&self, format: Format) -> std::io::Result<Vec<u8>> {
        let mut out = Vec::new();
        match format {
            Format::Csv => {
                writeln!(out, "# tool: {TOOL}")?;
                for (k, v) in &self.entries {
                    match v {
                        Value::String(s) => writeln!(out, "{k}: {s}")?,
                        other => writeln!(out, "{k}: {other}")?,
                    }
                }
            }
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("tool".into(), json!(TOOL));
                for (k, v) in &self.entries {
                    obj.insert(k.clone(), v.clone());
                }
                serde_json::to_writer_pretty(&mut out, &Value::Object(obj))?;
                out.push(b'\n');
            }
        }
        Ok(out)
    }
}

/// Compact human-readable number: ten decimals, trailing zeros dropped.
pub fn short(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn short_complex(re: f64, im: f64) -> String {
    if short(im) == "0" {
        short(re)
    } else if im < 0.0 {
        format!("{}-{}i", short(re), short(-im))
    } else {
        format!("{}+{}i", short(re), short(im))
    }
}
