//! Text formats for matrices: `u v` edge lists, whitespace- or
//! comma-separated dense matrices, and dense CSV output.

use std::io::{BufRead, Write};

use crate::error::{LabError, Result};
use crate::linalg::SymMatrix;

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('#')
        }
        Err(_) => true,
    })
}

/// Reads an undirected edge list with one `u v` pair of 0-indexed vertices
/// per line.  Blank lines and lines starting with `#` are skipped.  The
/// vertex count is `n` when given, else one more than the largest index.
pub fn read_edge_list<R: BufRead>(reader: R, n: Option<usize>) -> Result<SymMatrix<f64>> {
    let mut edges = Vec::new();
    for (lineno, line) in content_lines(reader) {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(LabError::Io(format!("line {lineno}: expected `u v`, got {line:?}")));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|_| LabError::Io(format!("line {lineno}: bad vertex index {s:?}")));
        let (u, v) = (parse(fields[0])?, parse(fields[1])?);
        if u == v {
            return Err(LabError::Io(format!("line {lineno}: self-loop at vertex {u}")));
        }
        edges.push((u, v));
    }
    let needed = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let n = match n {
        Some(n) if n < needed => return Err(LabError::Io(format!("edge list uses vertex {} but n = {n}", needed - 1))),
        Some(n) => n,
        None => needed,
    };
    let mut y = SymMatrix::zeros(n);
    for (u, v) in edges {
        y.set(u, v, 1.0);
    }
    Ok(y)
}

/// Reads a square symmetric matrix, one row per line, entries separated by
/// whitespace and/or commas.
pub fn read_dense_matrix<R: BufRead>(reader: R) -> Result<SymMatrix<f64>> {
    let mut rows = Vec::new();
    for (lineno, line) in content_lines(reader) {
        let line = line?;
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| LabError::Io(format!("line {lineno}: bad number {s:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    SymMatrix::from_rows(&rows).map_err(|e| LabError::Io(e.to_string()))
}

/// Writes all `n × n` entries as comma-separated rows with 17 significant
/// digits and LF line endings.
pub fn write_dense_csv<W: Write>(y: &SymMatrix<f64>, mut out: W) -> Result<()> {
    let n = y.n();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:.16e}", y.get(i, j))).collect();
        out.write_all(row.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
