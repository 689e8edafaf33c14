pub mod cycles;
pub mod ising;
pub mod measures;
pub mod nets;
pub mod wigner;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use clap::ValueEnum;
use ldp_core::{io, LabError, Law, Matrix, Result};
use serde::Serialize;

use crate::report::Report;

/// A finished table, plus a failure to report after the table is written.
pub struct Outcome {
    pub report: Report,
    pub warnings: Vec<String>,
    pub failure: Option<LabError>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, warnings: Vec::new(), failure: None }
    }
}

pub fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

/// `points` evenly spaced values from `a` to `b`.
pub fn grid(a: f64, b: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(LabError::arg("--points must be at least 1"));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(LabError::arg(format!("grid end points must be finite, got [{a}, {b}]")));
    }
    if points == 1 {
        return Ok(vec![a]);
    }
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points).map(|i| if i + 1 == points { b } else { a + i as f64 * step }).collect())
}

pub fn export_matrix(y: &Matrix, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    io::write_dense_csv(y, BufWriter::new(file))
}

/// Unit-variance entry laws.
#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Rademacher,
    Gaussian,
    Uniform,
}

impl Ensemble {
    pub fn law(self) -> Law {
        match self {
            Ensemble::Rademacher => Law::rademacher(),
            Ensemble::Gaussian => Law::gaussian(1.0).expect("unit variance is valid"),
            Ensemble::Uniform => Law::uniform_sym(3f64.sqrt()).expect("positive half-width is valid"),
        }
    }
}
