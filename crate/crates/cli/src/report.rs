//! Tabular experiment output: CSV for plotting and an optional JSON record.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => quote(s),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(format_float(*v)),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Missing, Into::into)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Rows of one experiment plus the parameters that produced them.
#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: &'static str,
    pub params: Value,
    pub seed: u64,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(experiment: &'static str, params: Value, seed: u64, columns: &[&'static str]) -> Self {
        Report { experiment, params, seed, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header of {}", self.experiment);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        out.flush()
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.to_string(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        json!({
            "experiment": self.experiment,
            "params": self.params,
            "seed": self.seed,
            "rows": rows,
            "meta": { "version": env!("CARGO_PKG_VERSION"), "timestamp": timestamp },
        })
    }
}

/// Where the CSV and JSON outputs go.
#[derive(Debug, Clone, Default)]
pub struct Sinks {
    pub csv: Option<PathBuf>,
    /// `Some(None)` means `--json` without a path.
    pub json: Option<Option<PathBuf>>,
}

impl Sinks {
    /// CSV goes to `--out` or stdout.  JSON goes to its own path, else next
    /// to `--out` with a `.json` extension, else to stdout in place of CSV.
    pub fn emit(&self, report: &Report) -> io::Result<()> {
        let json_path = match &self.json {
            Some(Some(p)) => Some(p.clone()),
            Some(None) => self.csv.as_ref().map(|p| p.with_extension("json")),
            None => None,
        };
        let json_to_stdout = matches!(self.json, Some(None)) && self.csv.is_none();
        match &self.csv {
            Some(p) => report.write_csv(BufWriter::new(create(p)?))?,
            None if !json_to_stdout => report.write_csv(io::stdout().lock())?,
            None => {}
        }
        let text = serde_json::to_string_pretty(&report.to_json()).map_err(io::Error::other)? + "\n";
        if let Some(p) = json_path {
            create(&p)?.write_all(text.as_bytes())?;
        } else if json_to_stdout {
            io::stdout().lock().write_all(text.as_bytes())?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> io::Result<File> {
    File::create(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}
