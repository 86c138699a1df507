//! Output in JSON, CSV or plain text.
//!
//! JSON is canonical: keys sorted, numbers in shortest round-trip form and
//! integral values without a fraction. CSV numbers use 6 significant digits.

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// A command result: one record or a table of rows.
pub struct Output {
    json: Value,
    columns: Option<Vec<String>>,
    pub pass: bool,
}

impl Output {
    pub fn record(json: Value) -> Self {
        Self { json: canonical(json), columns: None, pass: true }
    }

    pub fn table(columns: &[&str], rows: Vec<Value>) -> Self {
        let columns = Some(columns.iter().map(|c| c.to_string()).collect());
        Self { json: canonical(Value::Array(rows)), columns, pass: true }
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string(&self.json).expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => {
                let (header, rows) = self.grid();
                let mut s = csv_line(header.iter().map(|h| h.to_string()));
                for row in rows {
                    s.push_str(&csv_line(row.iter().map(csv_cell)));
                }
                s
            }
            Format::Text => self.text(),
        }
    }

    /// Column names and rows of cells.
    fn grid(&self) -> (Vec<String>, Vec<Vec<Value>>) {
        match (&self.columns, &self.json) {
            (Some(cols), Value::Array(rows)) => {
                let cells = rows.iter().map(|r| cols.iter().map(|c| r.get(c).cloned().unwrap_or(Value::Null)).collect()).collect();
                (cols.clone(), cells)
            }
            _ => {
                let flat = flatten(&self.json);
                let header = flat.iter().map(|(k, _)| k.clone()).collect();
                (header, vec![flat.into_iter().map(|(_, v)| v).collect()])
            }
        }
    }

    fn text(&self) -> String {
        let mut s = String::new();
        match &self.columns {
            Some(_) => {
                let (header, rows) = self.grid();
                let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(text_cell).collect()).collect();
                let widths: Vec<usize> = (0..header.len())
                    .map(|i| cells.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
                    .collect();
                let line = |row: &[String]| {
                    let padded: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                    padded.join("  ").trim_end().to_string() + "\n"
                };
                s.push_str(&line(&header));
                for r in &cells {
                    s.push_str(&line(r));
                }
                if header.iter().any(|h| h == "pass") {
                    let failed = rows.iter().filter(|r| r.last() != Some(&Value::Bool(true))).count();
                    s.push_str(&format!("{} checks, {} failed\n", rows.len(), failed));
                }
            }
            None => {
                let flat = flatten(&self.json);
                let w = flat.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in &flat {
                    s.push_str(&format!("{k:<w$}  {}\n", text_cell(v)));
                }
            }
        }
        s
    }
}

/// Integral floats become integers, `-0` becomes `0`; object keys stay sorted.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() && f.fract() == 0.0 && f.abs() < 9.007_199_254_740_992e15 => Value::Number(Number::from(f as i64)),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect::<Map<_, _>>()),
        v => v,
    }
}

/// Nested objects as dotted keys in key order.
fn flatten(v: &Value) -> Vec<(String, Value)> {
    fn go(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
        match v {
            Value::Object(o) => {
                for (k, x) in o {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    go(&key, x, out);
                }
            }
            x => out.push((prefix.to_string(), x.clone())),
        }
    }
    let mut out = Vec::new();
    go("", v, &mut out);
    out
}

fn text_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => a.iter().map(text_cell).collect::<Vec<_>>().join(" "),
        Value::Null => "null".into(),
        x => x.to_string(),
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt_g),
        Value::Array(a) => a.iter().map(csv_cell).collect::<Vec<_>>().join(";"),
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        x => x.to_string(),
    }
}

fn csv_line(cells: impl Iterator<Item = String>) -> String {
    let quoted: Vec<String> = cells
        .map(|c| if c.contains([',', '"', '\n']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c })
        .collect();
    quoted.join(",") + "\n"
}

/// `%g` with 6 significant digits.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s.to_string() };
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mant), exp.abs())
    } else {
        trim(&format!("{v:.*}", (5 - exp) as usize))
    }
}
