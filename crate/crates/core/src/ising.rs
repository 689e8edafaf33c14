//! Ising-type partition functions on the hypercube with uniform
//! (Rademacher) base measure: exact enumeration, the naive mean-field
//! supremum, and a net-based upper certificate.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::linalg::{eigen_symmetric, eigenvalues_symmetric, SymMatrix};
use crate::rng::{self, Stream};
use crate::stats::quantile;

/// Largest dimension handled by exhaustive enumeration.
pub const MAX_EXACT_N: usize = 24;
/// Largest dimension accepted by [`partition_certificate`].
pub const MAX_CERTIFY_N: usize = 10;
/// Default number of mean-field starts.
pub const DEFAULT_STARTS: usize = 32;

const DAMPING: f64 = 0.5;
const FIXED_POINT_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;
/// Largest coordinate grid pushed through the coupling explicitly.
const MAX_GRID_POINTS: f64 = 2.0e6;

/// Coupling matrix `A` with zero diagonal; the energy is `⟨σ, Aσ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    a: SymMatrix<f64>,
}

impl IsingProblem {
    pub fn new(a: SymMatrix<f64>) -> Result<Self> {
        if a.n() == 0 {
            return Err(LabError::arg("coupling matrix must be at least 1x1"));
        }
        if !a.has_zero_diagonal() {
            return Err(LabError::Domain("coupling matrix must have an exactly zero diagonal".into()));
        }
        if a.off_diagonal().any(|(_, _, v)| !v.is_finite()) {
            return Err(LabError::Domain("coupling matrix has non-finite entries".into()));
        }
        Ok(IsingProblem { a })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn coupling(&self) -> &SymMatrix<f64> {
        &self.a
    }

    /// Mean-field objective `⟨x, Ax⟩ − Σ Λ*(x_i)` for Rademacher `Λ*`.
    /// Returns `-inf` outside `[-1, 1]^n`.
    pub fn meanfield_objective(&self, x: &[f64]) -> f64 {
        let entropy: f64 = x.iter().map(|&v| rademacher_legendre(v)).sum();
        self.a.quadratic_form(x) - entropy
    }

    /// `||x − tanh(2Ax)||_∞`.
    pub fn fixed_point_residual(&self, x: &[f64]) -> f64 {
        let ax = self.a.matvec(x);
        x.iter().zip(&ax).map(|(&v, &g)| (v - (2.0 * g).tanh()).abs()).fold(0.0, f64::max)
    }
}

/// `Λ*(x) = ((1+x)/2) log(1+x) + ((1−x)/2) log(1−x)`, `+inf` off `[-1, 1]`.
fn rademacher_legendre(x: f64) -> f64 {
    if x.abs() > 1.0 {
        return f64::INFINITY;
    }
    let term = |u: f64| if u == 0.0 { 0.0 } else { 0.5 * u * u.ln() };
    term(1.0 + x) + term(1.0 - x)
}

/// Running `log Σ exp(e_i)`.
#[derive(Debug, Clone, Copy)]
struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl LogSumExp {
    fn new() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, scaled: 0.0 }
    }

    fn push(&mut self, e: f64) {
        if e <= self.max {
            self.scaled += (e - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - e).exp() + 1.0;
            self.max = e;
        }
    }

    fn merge(&mut self, other: LogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.scaled += other.scaled * (other.max - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        }
    }

    fn value(&self) -> f64 {
        self.max + self.scaled.ln()
    }
}

/// Enumerates the low `free` spins in Gray-code order with the remaining
/// spins fixed by `prefix`, accumulating `exp⟨σ, Aσ⟩`.
fn enumerate_block(a: &[f64], n: usize, free: usize, prefix: usize) -> LogSumExp {
    let mut sigma: Vec<f64> = (0..n).map(|i| if i >= free && (prefix >> (i - free)) & 1 == 1 { -1.0 } else { 1.0 }).collect();
    let resync = |sigma: &[f64], field: &mut Vec<f64>| -> f64 {
        for i in 0..n {
            field[i] = (0..n).map(|j| a[i * n + j] * sigma[j]).sum();
        }
        (0..n).map(|i| sigma[i] * field[i]).sum()
    };
    let mut field = vec![0.0; n];
    let mut energy = resync(&sigma, &mut field);
    let mut acc = LogSumExp::new();
    acc.push(energy);
    for step in 1..(1usize << free) {
        let k = step.trailing_zeros() as usize;
        // Flipping σ_k changes the energy by −4σ_k h_k (zero diagonal).
        energy -= 4.0 * sigma[k] * field[k];
        let s = sigma[k];
        sigma[k] = -s;
        for i in 0..n {
            field[i] -= 2.0 * s * a[i * n + k];
        }
        if step % 1024 == 0 {
            energy = resync(&sigma, &mut field);
        }
        acc.push(energy);
    }
    acc
}

/// `log 2^{-n} Σ_σ exp⟨σ, Aσ⟩` by exhaustive enumeration, `n <= 24`.
pub fn exact_log_partition(p: &IsingProblem) -> Result<f64> {
    let n = p.n();
    if n > MAX_EXACT_N {
        return Err(LabError::Resource(format!("exact enumeration is limited to n <= {MAX_EXACT_N}, got {n}")));
    }
    let dense = p.a.to_dense();
    let a: Vec<f64> = (0..n * n).map(|k| dense.get(k / n, k % n)).collect();
    let fixed = if n >= 16 { 6 } else { 0 };
    let blocks: Vec<LogSumExp> = (0..1usize << fixed).into_par_iter().map(|prefix| enumerate_block(&a, n, n - fixed, prefix)).collect();
    let mut total = LogSumExp::new();
    for b in blocks {
        total.merge(b);
    }
    Ok(total.value() - n as f64 * std::f64::consts::LN_2)
}

/// Best stationary point found by the damped mean-field iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldSolution {
    pub x_star: Vec<f64>,
    pub value: f64,
    pub starts_used: usize,
    /// Number of starts that met the fixed-point tolerance.
    pub converged: usize,
    /// `||x − tanh(2Ax)||_∞` at `x_star`.
    pub residual: f64,
}

struct StartOutcome {
    x: Vec<f64>,
    value: f64,
    converged: bool,
    residual: f64,
}

fn iterate_fixed_point(p: &IsingProblem, mut x: Vec<f64>) -> StartOutcome {
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let ax = p.a.matvec(&x);
        let mut change: f64 = 0.0;
        for (xi, &g) in x.iter_mut().zip(&ax) {
            let next = (1.0 - DAMPING) * *xi + DAMPING * (2.0 * g).tanh();
            change = change.max((next - *xi).abs());
            *xi = next;
        }
        if change <= FIXED_POINT_TOL {
            converged = true;
            break;
        }
    }
    let value = p.meanfield_objective(&x);
    let residual = p.fixed_point_residual(&x);
    StartOutcome { x, value, converged, residual }
}

/// Lexicographic comparison of vectors rounded to `1e-9`.
fn rounded_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let (rx, ry) = ((x * 1e9).round(), (y * 1e9).round());
        match rx.total_cmp(&ry) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Initial points: all-`0.5`, then `±` the top eigenvector scaled to the
/// boundary of the cube, then uniform random points of the cube.
fn starting_points(p: &IsingProblem, starts: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = p.n();
    let mut out = vec![vec![0.5; n]];
    if starts > 1 {
        let e = eigen_symmetric(&p.a)?;
        let u = &e.vectors[0];
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let top: Vec<f64> = u.iter().map(|v| v / scale).collect();
        out.push(top.clone());
        if starts > 2 {
            out.push(top.iter().map(|v| -v).collect());
        }
    }
    for j in out.len()..starts {
        let mut r = rng::stream(seed, j as u64);
        out.push((0..n).map(|_| r.random_range(-1.0..=1.0)).collect());
    }
    Ok(out)
}

/// Multi-start damped fixed-point iteration `x ← x/2 + tanh(2Ax)/2` for
/// `sup_x ⟨x, Ax⟩ − Σ Λ*(x_i)`.  Returns the best converged start; ties go
/// to the lexicographically smallest point after rounding to `1e-9`.
pub fn meanfield_sup(p: &IsingProblem, starts: usize, rng: &mut Stream) -> Result<MeanFieldSolution> {
    if starts == 0 {
        return Err(LabError::arg("mean-field solver needs at least one start"));
    }
    let seed: u64 = rng.random();
    let initial = starting_points(p, starts, seed)?;
    let outcomes: Vec<StartOutcome> = initial.into_par_iter().map(|x0| iterate_fixed_point(p, x0)).collect();
    let converged = outcomes.iter().filter(|o| o.converged).count();
    let best = outcomes
        .into_iter()
        .filter(|o| o.converged)
        .max_by(|a, b| a.value.total_cmp(&b.value).then_with(|| rounded_cmp(&b.x, &a.x)));
    match best {
        Some(o) => Ok(MeanFieldSolution { x_star: o.x, value: o.value, starts_used: starts, converged, residual: o.residual }),
        None => Err(LabError::Convergence(format!(
            "none of {starts} mean-field starts reached sup-norm change {FIXED_POINT_TOL:e} within {MAX_ITERATIONS} iterations"
        ))),
    }
}

/// How the net of `2A[-1,1]^n` was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetKind {
    /// A coordinate grid of the cube pushed through `2A`, with images
    /// merged within `δ/(2D)`.
    Pushforward,
    /// Cells of a product grid in the eigenbasis of `A`; one image point per
    /// cell meeting the image.  Only the count is formed.
    EigenCells,
}

impl NetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NetKind::Pushforward => "pushforward",
            NetKind::EigenCells => "eigen-cells",
        }
    }
}

/// Terms of the bound `log Z ≤ sup + log|net| + δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub sup: f64,
    pub log_z: f64,
    pub net_log_card: f64,
    pub delta: f64,
    /// Net mesh `δ/D` with `D = 2√n`.
    pub net_mesh: f64,
    pub net_kind: NetKind,
    /// Coordinate grid spacing, for pushforward nets.
    pub grid_spacing: Option<f64>,
    pub bound_ok: bool,
}

impl Certificate {
    pub fn upper_bound(&self) -> f64 {
        self.sup + self.net_log_card + self.delta
    }
}

/// Largest coordinate spacing whose pushforward grid, after merging within
/// `δ/(2D)`, is a `δ/D`-net of `2A[-1,1]^n`.
pub fn max_grid_spacing(a: &SymMatrix<f64>, delta: f64) -> Result<f64> {
    let n = a.n() as f64;
    let d = 2.0 * n.sqrt();
    let norm = crate::linalg::operator_norm(a)?;
    // Grid covering radius h√n/2, stretched by ||2A||, must stay within δ/(2D).
    Ok(if norm == 0.0 { 2.0 } else { (delta / (2.0 * d * norm * n.sqrt())).min(2.0) })
}

fn pushforward_net_size(a: &SymMatrix<f64>, h: f64, merge: f64) -> usize {
    let n = a.n();
    let g = (2.0 / h).ceil() as usize + 1;
    let step = 2.0 / (g - 1) as f64;
    let total = g.pow(n as u32);
    let cell = merge / (n as f64).sqrt();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut x = vec![0.0; n];
    for idx in 0..total {
        let mut rest = idx;
        for xi in x.iter_mut() {
            *xi = -1.0 + (rest % g) as f64 * step;
            rest /= g;
        }
        let image = a.matvec(&x);
        seen.insert(image.iter().map(|v| (2.0 * v / cell).floor() as i64).collect());
    }
    seen.len()
}

fn eigen_cell_log_count(a: &SymMatrix<f64>, mesh: f64) -> Result<f64> {
    let n = a.n();
    let e = eigen_symmetric(a)?;
    let side = mesh / (n as f64).sqrt();
    Ok(e
        .values
        .iter()
        .zip(&e.vectors)
        .map(|(&lambda, u)| {
            let l1: f64 = u.iter().map(|v| v.abs()).sum();
            let width = 4.0 * lambda.abs() * l1;
            ((width / side).ceil().max(1.0)).ln()
        })
        .sum())
}

/// Checks `log Z ≤ sup + log|D_δ| + δ` where `D_δ` is an explicit
/// `δ/D`-net of `2A[-1,1]^n` (`D = 2√n`) and `sup` is the mean-field value.
/// Since the mean-field value never exceeds the true supremum, a passing
/// check also holds with the exact supremum.
///
/// With `mesh = Some(h)` the pushforward grid uses spacing `h`, which must be
/// fine enough to certify the net mesh.  With `None` the finest admissible
/// spacing is used when that grid is small enough, and the eigenbasis cell
/// count otherwise.
pub fn partition_certificate(p: &IsingProblem, delta: f64, mesh: Option<f64>, starts: usize, rng: &mut Stream) -> Result<Certificate> {
    let n = p.n();
    if n > MAX_CERTIFY_N {
        return Err(LabError::Resource(format!("certificates are limited to n <= {MAX_CERTIFY_N}, got {n}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(LabError::arg(format!("delta must be positive, got {delta}")));
    }
    let d = 2.0 * (n as f64).sqrt();
    let net_mesh = delta / d;
    let h_max = max_grid_spacing(&p.a, delta)?;
    let grid_count = |h: f64| ((2.0 / h).ceil() + 1.0).powi(n as i32);

    let (net_kind, grid_spacing, net_log_card) = match mesh {
        Some(h) => {
            if !(h > 0.0) {
                return Err(LabError::arg(format!("grid spacing must be positive, got {h}")));
            }
            if h > h_max * (1.0 + 1e-12) {
                return Err(LabError::Certification(format!(
                    "grid spacing {h} is too coarse: a {net_mesh}-net of 2A[-1,1]^n needs spacing <= {h_max}"
                )));
            }
            if grid_count(h) > MAX_GRID_POINTS {
                return Err(LabError::Resource(format!("grid with spacing {h} has {:.3e} points", grid_count(h))));
            }
            (NetKind::Pushforward, Some(h), (pushforward_net_size(&p.a, h, net_mesh / 2.0) as f64).ln())
        }
        None if grid_count(h_max) <= MAX_GRID_POINTS => {
            (NetKind::Pushforward, Some(h_max), (pushforward_net_size(&p.a, h_max, net_mesh / 2.0) as f64).ln())
        }
        None => (NetKind::EigenCells, None, eigen_cell_log_count(&p.a, net_mesh)?),
    };

    let log_z = exact_log_partition(p)?;
    let sup = meanfield_sup(p, starts, rng)?.value;
    let bound_ok = log_z <= sup + net_log_card + delta;
    Ok(Certificate { sup, log_z, net_log_card, delta, net_mesh, net_kind, grid_spacing, bound_ok })
}

/// Spectral summaries of a coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDiagnostics {
    /// `(q, value)` pairs of the empirical spectral distribution.
    pub esd_quantiles: Vec<(f64, f64)>,
    /// `n^{-1} tr A²`.
    pub hs_norm: f64,
    pub op_norm: f64,
    /// Fraction of eigenvalues with `|λ| > 1e-9·max(1, ||A||)`.
    pub nonzero_fraction: f64,
}

pub const ESD_LEVELS: [f64; 7] = [0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0];

pub fn spectral_diagnostics(a: &SymMatrix<f64>) -> Result<SpectralDiagnostics> {
    let mut values = eigenvalues_symmetric(a)?;
    values.reverse();
    let n = a.n() as f64;
    let op_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = 1e-9 * op_norm.max(1.0);
    Ok(SpectralDiagnostics {
        esd_quantiles: ESD_LEVELS.iter().map(|&q| (q, quantile(&values, q))).collect(),
        hs_norm: a.inner(a) / n,
        op_norm,
        nonzero_fraction: values.iter().filter(|v| v.abs() > cutoff).count() as f64 / n,
    })
}

/// Graph families used to build couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFamily {
    Star,
    Cycle,
    Complete,
    ErdosRenyi { p: f64 },
}

impl GraphFamily {
    /// 0/1 adjacency matrix on `n` vertices; vertex 0 is the star's center.
    pub fn adjacency(&self, n: usize, rng: &mut Stream) -> Result<SymMatrix<f64>> {
        match *self {
            GraphFamily::Star => Ok(SymMatrix::from_fn(n, |i, j| if i == 0 && j > 0 { 1.0 } else { 0.0 })),
            GraphFamily::Cycle => {
                if n < 3 {
                    return Err(LabError::arg("cycle graphs need n >= 3"));
                }
                Ok(SymMatrix::from_fn(n, |i, j| if j == i + 1 || (i == 0 && j == n - 1) { 1.0 } else { 0.0 }))
            }
            GraphFamily::Complete => Ok(SymMatrix::from_fn(n, |i, j| if i != j { 1.0 } else { 0.0 })),
            GraphFamily::ErdosRenyi { p } => crate::cycles::er_sample(n, p, rng),
        }
    }
}
