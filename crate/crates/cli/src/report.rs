//! Tabular reports in CSV or JSON.

use serde_json::{json, Map, Value};

use crate::error::{invalid, CliError};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i128),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
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

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(invalid(format!("format: expected \"csv\" or \"json\", got {other:?}"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    /// Ordered `(key, value)` header entries.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        if self.rows.is_empty() {
            return Err(invalid("report has no rows"));
        }
        Ok(match format {
            Format::Csv => self.to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serialises");
                s.push('\n');
                s
            }
        })
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> Value {
        let mut meta = Map::new();
        for (k, v) in &self.meta {
            meta.insert(k.clone(), Value::String(v.clone()));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(json_cell).collect()))
            .collect();
        json!({ "meta": meta, "columns": self.columns, "rows": rows })
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(x) => fmt_g(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Num(x) if x.is_finite() => {
            let v: f64 = fmt_g(*x).parse().expect("formatted float parses");
            json!(v)
        }
        Cell::Num(_) | Cell::Empty => Value::Null,
        Cell::Int(i) => json!(*i as i64),
        Cell::Text(s) => json!(s),
        Cell::Bool(b) => json!(b),
    }
}

/// `%.12g`.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Structural check of a JSON report.
pub fn validate_json(text: &str) -> Result<(), CliError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| invalid(format!("report is not JSON (line {}, column {}): {e}", e.line(), e.column())))?;
    let obj = v.as_object().ok_or_else(|| invalid("report must be an object"))?;
    for key in obj.keys() {
        if !["meta", "columns", "rows"].contains(&key.as_str()) {
            return Err(invalid(format!("unexpected top-level key {key:?}")));
        }
    }
    let meta = obj
        .get("meta")
        .and_then(Value::as_object)
        .ok_or_else(|| invalid("meta must be an object"))?;
    for key in ["version", "command", "config_hash", "seed"] {
        match meta.get(key) {
            Some(Value::String(_)) => {}
            _ => return Err(invalid(format!("meta.{key} must be a string"))),
        }
    }
    let columns = obj
        .get("columns")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("columns must be an array"))?;
    let mut names = std::collections::BTreeSet::new();
    for c in columns {
        let name = c.as_str().ok_or_else(|| invalid("column names must be strings"))?;
        if !names.insert(name) {
            return Err(invalid(format!("duplicate column {name:?}")));
        }
    }
    let rows = obj
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| invalid("rows must be an array"))?;
    if rows.is_empty() {
        return Err(invalid("rows must be nonempty"));
    }
    for (i, row) in rows.iter().enumerate() {
        let cells = row.as_array().ok_or_else(|| invalid(format!("rows[{i}] must be an array")))?;
        if cells.len() != columns.len() {
            return Err(invalid(format!(
                "rows[{i}] has {} cells, expected {}",
                cells.len(),
                columns.len()
            )));
        }
        if cells.iter().any(|c| c.is_array() || c.is_object()) {
            return Err(invalid(format!("rows[{i}] holds a nested value")));
        }
    }
    Ok(())
}
