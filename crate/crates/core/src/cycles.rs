//! Upper tails of cycle counts in Erdős–Rényi graphs: the entropy cost
//! `Λ*_p`, the independence-polynomial rate, planted candidates and a
//! penalty-method solver for the finite-n variational problem.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::linalg::{eigenvalues_symmetric, SymMatrix};
use crate::measures::bernoulli_entropy;
use crate::rng::{self, Stream};
use crate::stats::{CompensatedSum, Estimate};

/// Largest dimension accepted by [`numeric_phi`].
pub const MAX_OPT_N: usize = 60;
/// Largest `n` for which traces are computed in exact integer arithmetic.
pub const EXACT_TRACE_N: usize = 20;

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(LabError::arg(format!("edge probability must lie in (0, 1), got {p}")))
    }
}

/// `Λ*_p(Y) = Σ_{i<j} I_p(Y_ij)`.
pub fn lambda_star_p(y: &SymMatrix<f64>, p: f64) -> Result<f64> {
    check_probability(p)?;
    if !y.has_zero_diagonal() {
        return Err(LabError::arg("Λ*_p needs a zero diagonal"));
    }
    let mut acc = CompensatedSum::new();
    for (i, j, v) in y.off_diagonal() {
        if !(0.0..=1.0).contains(&v) {
            return Err(LabError::arg(format!("entry ({i}, {j}) = {v} lies outside [0, 1]")));
        }
        acc.add(bernoulli_entropy(p, v));
    }
    Ok(acc.value())
}

/// Coefficients `i_k` of the independence polynomial of the cycle `C_d`,
/// `3 <= d <= 20`.
pub fn independence_polynomial_cycle(d: usize) -> Result<Vec<u64>> {
    if !(3..=20).contains(&d) {
        return Err(LabError::arg(format!("cycle length must lie in 3..=20, got {d}")));
    }
    let mut total = vec![0u64; d / 2 + 1];
    // Fix vertex 0 in or out, walk along the path 1..d-1, close the cycle.
    for first in [false, true] {
        // counts[last_in][k]
        let mut counts = [vec![0u64; d + 1], vec![0u64; d + 1]];
        counts[first as usize][first as usize] = 1;
        for _ in 1..d {
            let mut next = [vec![0u64; d + 1], vec![0u64; d + 1]];
            for k in 0..=d {
                next[0][k] = counts[0][k] + counts[1][k];
                if k > 0 {
                    next[1][k] = counts[0][k - 1];
                }
            }
            counts = next;
        }
        for k in 0..=d {
            let mut c = counts[0][k];
            if !first {
                c += counts[1][k];
            }
            if c > 0 {
                total[k] += c;
            }
        }
    }
    while total.last() == Some(&0) {
        total.pop();
    }
    Ok(total)
}

fn eval_poly(coeffs: &[u64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

/// The root `θ ≥ 0` of `P_{C_d}(θ) = t`.
pub fn theta_t(d: usize, t: f64) -> Result<f64> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(LabError::Domain(format!("θ_t needs t >= 1, got {t}")));
    }
    let coeffs = independence_polynomial_cycle(d)?;
    if t == 1.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while eval_poly(&coeffs, hi) < t {
        hi *= 2.0;
    }
    if eval_poly(&coeffs, hi) == t {
        return Ok(polish_root(&coeffs, t, hi));
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = eval_poly(&coeffs, mid);
        if v == t {
            return Ok(polish_root(&coeffs, t, mid));
        }
        if v < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (vl, vh) = (eval_poly(&coeffs, lo), eval_poly(&coeffs, hi));
    Ok(polish_root(&coeffs, t, if (vl - t).abs() <= (vh - t).abs() { lo } else { hi }))
}

/// Error-free `a + b = s + e`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `P(x) − t` with compensated Horner evaluation, accurate to a few ulps
/// of the residual rather than of `P(x)`.
fn residual(coeffs: &[u64], x: f64, t: f64) -> f64 {
    let (mut acc, mut err) = (0.0f64, 0.0f64);
    for &c in coeffs.iter().rev() {
        let p = acc * x;
        let pe = acc.mul_add(x, -p);
        let (s, se) = two_sum(p, c as f64);
        acc = s;
        err = err.mul_add(x, pe + se);
    }
    let (s, se) = two_sum(acc, -t);
    s + (se + err)
}

/// Newton steps on the accurate residual; a float root found by bisection
/// can sit a few ulps from the one nearest the true root.
fn polish_root(coeffs: &[u64], t: f64, mut x: f64) -> f64 {
    let deriv: Vec<u64> = coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as u64 * c).collect();
    let mut r = residual(coeffs, x, t);
    for _ in 0..3 {
        let slope = eval_poly(&deriv, x);
        if r == 0.0 || !(slope > 0.0) {
            break;
        }
        let next = x - r / slope;
        let rn = residual(coeffs, next, t);
        if !(rn.abs() < r.abs()) {
            break;
        }
        (x, r) = (next, rn);
    }
    x
}

/// Density regime of the edge probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `p ≫ n^{-1/2}`.
    Dense,
    /// `n^{-1} ≪ p ≪ n^{-1/2}`.
    Sparse,
}

/// `Φ(t)`: `min(θ_t, (t−1)^{2/d}/2)` when dense, `(t−1)^{2/d}/2` when sparse.
pub fn phi(d: usize, t: f64, regime: Regime) -> Result<f64> {
    let theta = theta_t(d, t)?;
    let clique = 0.5 * (t - 1.0).powf(2.0 / d as f64);
    Ok(match regime {
        Regime::Dense => theta.min(clique),
        Regime::Sparse => clique,
    })
}

/// Parameters of the cycle upper-tail problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleProblem {
    pub n: usize,
    pub p: f64,
    pub d: usize,
    pub t: f64,
}

impl CycleProblem {
    pub fn new(n: usize, p: f64, d: usize, t: f64) -> Result<Self> {
        check_probability(p)?;
        if n < 2 {
            return Err(LabError::arg("cycle problems need n >= 2"));
        }
        if d < 3 {
            return Err(LabError::arg(format!("cycle length must be >= 3, got {d}")));
        }
        if !(t >= 1.0) || !t.is_finite() {
            return Err(LabError::Domain(format!("tail level must be >= 1, got {t}")));
        }
        Ok(CycleProblem { n, p, d, t })
    }

    /// Speed `n² p² log(1/p)`.
    pub fn v_n(&self) -> f64 {
        let n = self.n as f64;
        n * n * self.p * self.p * (1.0 / self.p).ln()
    }

    /// Trace threshold `t (np)^d`.
    pub fn threshold(&self) -> f64 {
        self.t * self.scale()
    }

    fn scale(&self) -> f64 {
        (self.n as f64 * self.p).powi(self.d as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// Entries 1 on a block of `r` vertices.
    Clique(usize),
    /// Entries 1 on every pair touching one of `s` vertices.
    Hub(usize),
    Numeric,
}

impl CandidateKind {
    pub fn label(&self) -> String {
        match self {
            CandidateKind::Clique(r) => format!("clique({r})"),
            CandidateKind::Hub(s) => format!("hub({s})"),
            CandidateKind::Numeric => "numeric".into(),
        }
    }
}

/// A weighted graph with its entropy cost and cycle-trace ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateMatrix {
    /// Formed only for numeric candidates and on request for planted ones.
    pub y: Option<SymMatrix<f64>>,
    pub kind: CandidateKind,
    /// `Λ*_p(Y)`.
    pub cost: f64,
    /// `tr(Y^d) / (np)^d`.
    pub trace_ratio: f64,
}

impl CandidateMatrix {
    pub fn cost_over_vn(&self, p: &CycleProblem) -> f64 {
        self.cost / p.v_n()
    }

    pub fn is_feasible(&self, p: &CycleProblem) -> bool {
        self.trace_ratio >= p.t
    }
}

/// `tr(Y^d)` for `Y` with two vertex blocks of sizes `r` and `n − r`:
/// off-diagonal value `a` inside the first block, `b` inside the second and
/// `c` between them.  Uses the block spectrum: `−a` with multiplicity
/// `r−1`, `−b` with multiplicity `n−r−1`, and the eigenvalues of the
/// quotient matrix `[[a(r−1), c(n−r)], [c r, b(n−r−1)]]`.
pub fn two_block_trace(n: usize, r: usize, a: f64, b: f64, c: f64, d: u32) -> f64 {
    let (rf, sf) = (r as f64, (n - r) as f64);
    let pow = |x: f64| x.powi(d as i32);
    let mut total = 0.0;
    if r >= 1 {
        total += (rf - 1.0) * pow(-a);
    }
    if n - r >= 1 {
        total += (sf - 1.0) * pow(-b);
    }
    if r == 0 {
        total += pow(b * (sf - 1.0));
    } else if r == n {
        total += pow(a * (rf - 1.0));
    } else {
        let (q11, q12, q21, q22) = (a * (rf - 1.0), c * sf, c * rf, b * (sf - 1.0));
        let half_tr = 0.5 * (q11 + q22);
        let disc = (0.25 * (q11 - q22) * (q11 - q22) + q12 * q21).sqrt();
        total += pow(half_tr + disc) + pow(half_tr - disc);
    }
    total
}

fn pairs(k: usize) -> f64 {
    (k as f64) * (k as f64 - 1.0) / 2.0
}

/// Clique candidate on the first `r` vertices.
pub fn clique_of_size(p: &CycleProblem, r: usize) -> Result<CandidateMatrix> {
    if r > p.n {
        return Err(LabError::Infeasible(format!("clique size {r} exceeds n = {}", p.n)));
    }
    let cost = pairs(r) * bernoulli_entropy(p.p, 1.0);
    let trace_ratio = two_block_trace(p.n, r, 1.0, p.p, p.p, p.d as u32) / p.scale();
    Ok(CandidateMatrix { y: None, kind: CandidateKind::Clique(r), cost, trace_ratio })
}

/// Hub candidate on the first `s` vertices.
pub fn hub_of_size(p: &CycleProblem, s: usize) -> Result<CandidateMatrix> {
    if s > p.n {
        return Err(LabError::Infeasible(format!("hub size {s} exceeds n = {}", p.n)));
    }
    let touched = pairs(s) + (s * (p.n - s)) as f64;
    let cost = touched * bernoulli_entropy(p.p, 1.0);
    let trace_ratio = two_block_trace(p.n, s, 1.0, p.p, 1.0, p.d as u32) / p.scale();
    Ok(CandidateMatrix { y: None, kind: CandidateKind::Hub(s), cost, trace_ratio })
}

/// Clique of size `r = ⌈(t−1)^{1/d} np⌉`.
pub fn planted_clique(p: &CycleProblem) -> Result<CandidateMatrix> {
    let r = ((p.t - 1.0).powf(1.0 / p.d as f64) * p.n as f64 * p.p - 1e-9).ceil().max(0.0) as usize;
    clique_of_size(p, r)
}

/// Hub of size `s = ⌈θ_t n p²⌉`.
pub fn planted_hub(p: &CycleProblem) -> Result<CandidateMatrix> {
    let s = (theta_t(p.d, p.t)? * p.n as f64 * p.p * p.p - 1e-9).ceil().max(0.0) as usize;
    hub_of_size(p, s)
}

/// Smallest feasible candidate in a size-indexed family, if any.
fn smallest_feasible(p: &CycleProblem, build: impl Fn(&CycleProblem, usize) -> Result<CandidateMatrix>) -> Result<Option<CandidateMatrix>> {
    for k in 0..=p.n {
        let c = build(p, k)?;
        if c.is_feasible(p) {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// Cheapest feasible clique (smallest size meeting the trace threshold).
pub fn smallest_feasible_clique(p: &CycleProblem) -> Result<Option<CandidateMatrix>> {
    smallest_feasible(p, clique_of_size)
}

/// Cheapest feasible hub.
pub fn smallest_feasible_hub(p: &CycleProblem) -> Result<Option<CandidateMatrix>> {
    smallest_feasible(p, hub_of_size)
}

/// Dense form of a planted candidate.
pub fn candidate_matrix(p: &CycleProblem, kind: CandidateKind) -> Result<SymMatrix<f64>> {
    let (n, q) = (p.n, p.p);
    Ok(match kind {
        CandidateKind::Clique(r) => SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else if j < r { 1.0 } else { q }),
        CandidateKind::Hub(s) => SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else if i < s { 1.0 } else { q }),
        CandidateKind::Numeric => return Err(LabError::arg("numeric candidates carry their own matrix")),
    })
}

/// `∇ tr(Y^d)`: diagonal `d (Y^{d−1})_ii`, off-diagonal `2d (Y^{d−1})_ij`,
/// i.e. the derivative with respect to each symmetric pair of entries.
pub fn trace_power_gradient(y: &SymMatrix<f64>, d: u32) -> SymMatrix<f64> {
    assert!(d >= 1);
    let n = y.n();
    let df = d as f64;
    if d == 1 {
        return SymMatrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 });
    }
    let pw = y.to_dense().power(d as usize - 1);
    SymMatrix::from_fn(n, |i, j| if i == j { df * pw.get(i, i) } else { df * (pw.get(i, j) + pw.get(j, i)) })
}

/// Settings for [`numeric_phi`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhiConfig {
    pub rounds: usize,
    pub mu0: f64,
    pub mu_growth: f64,
    pub inner_iterations: usize,
    pub random_starts: usize,
    /// Entries are kept above `floor_factor · p`.
    pub floor_factor: f64,
    /// Box for the logistic parameters.
    pub z_bound: f64,
    pub seed: u64,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig { rounds: 6, mu0: 1.0, mu_growth: 10.0, inner_iterations: 300, random_starts: 3, floor_factor: 0.1, z_bound: 30.0, seed: 0 }
    }
}

/// One branch of the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    pub label: String,
    pub cost: f64,
    pub trace_ratio: f64,
    pub feasible: bool,
}

/// Solver output: the best feasible matrix and every branch tried.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPhi {
    pub best: CandidateMatrix,
    /// Label of the branch that produced `best`.
    pub origin: String,
    pub branches: Vec<BranchOutcome>,
}

struct Objective<'a> {
    p: &'a CycleProblem,
    floor: f64,
    mu: f64,
}

impl Objective<'_> {
    fn entries(&self, z: &[f64]) -> SymMatrix<f64> {
        let n = self.p.n;
        let mut y = SymMatrix::zeros(n);
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                y.set(i, j, self.floor + (1.0 - self.floor) * sigmoid(z[k]));
                k += 1;
            }
        }
        y
    }

    /// Scaled cost `Λ*_p/v_n + μ·max(0, 1 − tr/c)²` and its gradient in `z`.
    fn eval(&self, z: &[f64], want_grad: bool) -> (f64, Vec<f64>) {
        let y = self.entries(z);
        let n = self.p.n;
        let d = self.p.d;
        let vn = self.p.v_n();
        let c = self.p.threshold();
        let dense = y.to_dense();
        let pw = dense.power(d - 1);
        let tr = pw.trace_product(&dense);
        let hinge = (1.0 - tr / c).max(0.0);
        let mut cost = CompensatedSum::new();
        for (_, _, v) in y.off_diagonal() {
            cost.add(bernoulli_entropy(self.p.p, v));
        }
        let value = cost.value() / vn + self.mu * hinge * hinge;
        if !want_grad {
            return (value, Vec::new());
        }
        let lp = logit(self.p.p);
        let mut grad = Vec::with_capacity(z.len());
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let s = sigmoid(z[k]);
                let v = self.floor + (1.0 - self.floor) * s;
                let dcost = (logit(v) - lp) / vn;
                let dtr = d as f64 * (pw.get(i, j) + pw.get(j, i));
                let dpen = -2.0 * self.mu * hinge * dtr / c;
                grad.push((dcost + dpen) * (1.0 - self.floor) * s * (1.0 - s));
                k += 1;
            }
        }
        (value, grad)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logit(v: f64) -> f64 {
    (v / (1.0 - v)).ln()
}

fn to_logistic(v: f64, floor: f64, bound: f64) -> f64 {
    let s = ((v - floor) / (1.0 - floor)).clamp(0.0, 1.0);
    if s <= 0.0 {
        -bound
    } else if s >= 1.0 {
        bound
    } else {
        logit(s).clamp(-bound, bound)
    }
}

/// Projected gradient descent with Armijo backtracking on the box `[-L, L]`.
fn descend(obj: &Objective, z: &mut [f64], iterations: usize, bound: f64) {
    let (mut value, mut grad) = obj.eval(z, true);
    let mut step = 1.0;
    for _ in 0..iterations {
        let mut accepted = false;
        let mut trial = z.to_vec();
        while step > 1e-14 {
            for (t, (&zi, &g)) in trial.iter_mut().zip(z.iter().zip(&grad)) {
                *t = (zi - step * g).clamp(-bound, bound);
            }
            let decrease: f64 = z.iter().zip(&trial).zip(&grad).map(|((&a, &b), &g)| g * (a - b)).sum();
            let (v, _) = obj.eval(&trial, false);
            if decrease > 0.0 && v <= value - 1e-4 * decrease {
                accepted = true;
                let gain = value - v;
                z.copy_from_slice(&trial);
                let (nv, ng) = obj.eval(z, true);
                value = nv;
                grad = ng;
                step *= 2.0;
                if gain <= 1e-13 * (1.0 + value.abs()) {
                    return;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return;
        }
    }
}

/// Raises entries below `p` to `p` (lowers cost, raises every closed-walk
/// weight), then moves toward the all-ones matrix until `tr(Y^d) ≥ t(np)^d`.
fn restore_feasibility(p: &CycleProblem, y: &SymMatrix<f64>) -> Option<SymMatrix<f64>> {
    let y = y.map(|v| v.max(p.p));
    let y = SymMatrix::from_fn(p.n, |i, j| if i == j { 0.0 } else { y.get(i, j) });
    let c = p.threshold();
    let tr = |m: &SymMatrix<f64>| crate::linalg::trace_power_by_multiplication(m, p.d as u32);
    if tr(&y) >= c {
        return Some(y);
    }
    let mix = |alpha: f64| SymMatrix::from_fn(p.n, |i, j| if i == j { 0.0 } else { y.get(i, j) + alpha * (1.0 - y.get(i, j)) });
    if tr(&mix(1.0)) < c {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tr(&mix(mid)) >= c {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(mix(hi))
}

/// Penalty-method search for `inf {Λ*_p(Y) : tr(Y^d) ≥ t(np)^d}`, `n <= 60`.
///
/// Branches start from the planted clique and hub, the uniform-`p` matrix
/// and random perturbations of it.  Each optimized point is made feasible
/// before comparison.  The cheapest feasible clique and hub are also
/// entered as branches, so the result never costs more than either.
pub fn numeric_phi(p: &CycleProblem, config: &PhiConfig) -> Result<NumericPhi> {
    if p.n > MAX_OPT_N {
        return Err(LabError::Resource(format!("numeric_phi is limited to n <= {MAX_OPT_N}, got {}", p.n)));
    }
    let floor = config.floor_factor * p.p;
    let bound = config.z_bound;
    let m = p.n * (p.n - 1) / 2;
    let uniform = vec![to_logistic(p.p, floor, bound); m];
    let from_matrix = |y: &SymMatrix<f64>| -> Vec<f64> { y.off_diagonal().map(|(_, _, v)| to_logistic(v, floor, bound)).collect() };

    let mut starts: Vec<(String, Vec<f64>)> = Vec::new();
    for (label, cand) in [("clique", planted_clique(p)), ("hub", planted_hub(p))] {
        if let Ok(c) = cand {
            starts.push((label.into(), from_matrix(&candidate_matrix(p, c.kind)?)));
        }
    }
    starts.push(("uniform".into(), uniform.clone()));
    for j in 0..config.random_starts {
        let mut r = rng::substream(config.seed, 0x0070_6869, j as u64);
        let z: Vec<f64> = uniform.iter().map(|&u| (u + 2.0 * r.sample::<f64, _>(StandardNormal)).clamp(-bound, bound)).collect();
        starts.push((format!("random-{}", j + 1), z));
    }

    let optimized: Vec<(String, Option<SymMatrix<f64>>, f64)> = starts
        .into_par_iter()
        .map(|(label, mut z)| {
            let mut mu = config.mu0;
            for _ in 0..config.rounds {
                let obj = Objective { p, floor, mu };
                descend(&obj, &mut z, config.inner_iterations, bound);
                mu *= config.mu_growth;
            }
            let raw = Objective { p, floor, mu }.entries(&z);
            let raw_ratio = crate::linalg::trace_power_by_multiplication(&raw, p.d as u32) / p.scale();
            (label, restore_feasibility(p, &raw), raw_ratio)
        })
        .collect();

    let mut branches = Vec::new();
    let mut pool: Vec<(String, SymMatrix<f64>)> = Vec::new();
    for (label, y, raw_ratio) in optimized {
        match y {
            Some(y) => pool.push((label, y)),
            None => branches.push(BranchOutcome { label, cost: f64::INFINITY, trace_ratio: raw_ratio, feasible: false }),
        }
    }
    for (label, cand) in [("clique-min-feasible", smallest_feasible_clique(p)?), ("hub-min-feasible", smallest_feasible_hub(p)?)] {
        if let Some(c) = cand {
            pool.push((format!("{label}:{}", c.kind.label()), candidate_matrix(p, c.kind)?));
        }
    }

    let mut best: Option<(CandidateMatrix, String)> = None;
    for (label, y) in pool {
        let cost = lambda_star_p(&y, p.p)?;
        let trace_ratio = crate::linalg::trace_power_by_multiplication(&y, p.d as u32) / p.scale();
        let feasible = trace_ratio >= p.t;
        branches.push(BranchOutcome { label: label.clone(), cost, trace_ratio, feasible });
        if feasible && best.as_ref().is_none_or(|(b, _)| cost < b.cost) {
            best = Some((CandidateMatrix { y: Some(y), kind: CandidateKind::Numeric, cost, trace_ratio }, label));
        }
    }
    match best {
        Some((best, origin)) => Ok(NumericPhi { best, origin, branches }),
        None => {
            let worst = branches.iter().map(|b| p.t - b.trace_ratio).fold(f64::INFINITY, f64::min);
            Err(LabError::Infeasible(format!("no feasible matrix found; smallest trace-ratio shortfall {worst:e}")))
        }
    }
}

/// Adjacency matrix of `G(n, p)`; entries drawn row by row over `i < j`.
pub fn er_sample(n: usize, p: f64, rng: &mut Stream) -> Result<SymMatrix<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LabError::arg(format!("edge probability must lie in [0, 1], got {p}")));
    }
    Ok(SymMatrix::from_fn(n, |i, j| if i != j && rng.random_bool(p) { 1.0 } else { 0.0 }))
}

/// `tr(X^d)` for a 0/1 adjacency matrix in exact integer arithmetic.
pub fn exact_adjacency_trace(x: &SymMatrix<f64>, d: u32) -> Result<u128> {
    let n = x.n();
    let a: Vec<u128> = (0..n * n).map(|k| x.get(k / n, k % n) as u128).collect();
    let overflow = || LabError::Range(format!("tr(X^{d}) overflows 128-bit integers"));
    let mul = |u: &[u128], v: &[u128]| -> Result<Vec<u128>> {
        let mut out = vec![0u128; n * n];
        for i in 0..n {
            for k in 0..n {
                let uik = u[i * n + k];
                if uik == 0 {
                    continue;
                }
                for j in 0..n {
                    let add = uik.checked_mul(v[k * n + j]).ok_or_else(overflow)?;
                    out[i * n + j] = out[i * n + j].checked_add(add).ok_or_else(overflow)?;
                }
            }
        }
        Ok(out)
    };
    let mut pw = a.clone();
    for _ in 1..d {
        pw = mul(&pw, &a)?;
    }
    (0..n).try_fold(0u128, |s, i| s.checked_add(pw[i * n + i]).ok_or_else(overflow))
}

/// `tr(X^d)`: exact integers for `n <= 20`, spectral otherwise.
pub fn adjacency_trace(x: &SymMatrix<f64>, d: u32) -> Result<f64> {
    if x.n() <= EXACT_TRACE_N {
        Ok(exact_adjacency_trace(x, d)? as f64)
    } else {
        let values = eigenvalues_symmetric(x)?;
        Ok(values.iter().map(|v| v.powi(d as i32)).sum())
    }
}

/// Monte Carlo summary of `tr(X^d)/(np)^d` under `G(n, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub mean: Estimate,
    /// `(t, frequency of tr(X^d)/(np)^d ≥ t)`.
    pub tail_freq: Vec<(f64, f64)>,
}

/// Trial `i` uses stream `i` of `seed`; results do not depend on threading.
pub fn trace_tail_mc(p: &CycleProblem, levels: &[f64], trials: usize, seed: u64) -> Result<TailReport> {
    if trials < 100 {
        return Err(LabError::arg(format!("trace tail Monte Carlo needs at least 100 trials, got {trials}")));
    }
    let scale = p.scale();
    let ratios: Result<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let x = er_sample(p.n, p.p, &mut rng::stream(seed, i as u64))?;
            Ok(adjacency_trace(&x, p.d as u32)? / scale)
        })
        .collect();
    let ratios = ratios?;
    let tail_freq = levels.iter().map(|&t| (t, ratios.iter().filter(|&&r| r >= t).count() as f64 / trials as f64)).collect();
    Ok(TailReport { mean: Estimate::from_samples(&ratios), tail_freq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn brute_independent_sets(d: usize) -> Vec<u64> {
        let mut counts = vec![0u64; d + 1];
        for mask in 0u32..(1 << d) {
            let independent = (0..d).all(|i| !(mask >> i & 1 == 1 && mask >> ((i + 1) % d) & 1 == 1));
            if independent {
                counts[mask.count_ones() as usize] += 1;
            }
        }
        while counts.last() == Some(&0) {
            counts.pop();
        }
        counts
    }

    #[test]
    fn lambda_star_examples() {
        let y = SymMatrix::from_fn(5, |i, j| if i == j { 0.0 } else { 0.3 });
        assert_eq!(lambda_star_p(&y, 0.3).unwrap(), 0.0);
        let mut y = SymMatrix::from_fn(4, |i, j| if i == j { 0.0 } else { 0.1 });
        y.set(0, 1, 1.0);
        assert_abs_diff_eq!(lambda_star_p(&y, 0.1).unwrap(), 10f64.ln(), epsilon = 1e-12);
        let ones = SymMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_abs_diff_eq!(lambda_star_p(&ones, 0.5).unwrap(), 3.0 * 2f64.ln(), epsilon = 1e-12);
        let mut bad = ones.clone();
        bad.set(0, 2, 1.5);
        assert!(lambda_star_p(&bad, 0.5).is_err());
        assert!(lambda_star_p(&SymMatrix::identity(2), 0.5).is_err());
    }

    #[test]
    fn lambda_star_vanishes_only_at_p() {
        let mut y = SymMatrix::from_fn(4, |i, j| if i == j { 0.0 } else { 0.2 });
        assert_eq!(lambda_star_p(&y, 0.2).unwrap(), 0.0);
        y.set(1, 2, 0.2 + 1e-6);
        assert!(lambda_star_p(&y, 0.2).unwrap() > 0.0);
    }

    #[test]
    fn independence_polynomial_examples() {
        assert_eq!(independence_polynomial_cycle(3).unwrap(), vec![1, 3]);
        assert_eq!(independence_polynomial_cycle(4).unwrap(), vec![1, 4, 2]);
        assert_eq!(independence_polynomial_cycle(5).unwrap(), vec![1, 5, 5]);
        assert!(independence_polynomial_cycle(2).is_err());
        assert!(independence_polynomial_cycle(21).is_err());
    }

    #[test]
    fn independence_polynomial_matches_brute_force() {
        for d in 3..=16 {
            assert_eq!(independence_polynomial_cycle(d).unwrap(), brute_independent_sets(d), "d = {d}");
        }
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_t(5, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(theta_t(3, 4.0).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(theta_t(4, 7.0).unwrap(), 1.0, epsilon = 1e-10);
        assert!(theta_t(3, 0.5).is_err());
        for &(d, t) in &[(3, 1.7), (5, 3.3), (8, 12.0), (12, 1.01)] {
            let th = theta_t(d, t).unwrap();
            let v = eval_poly(&independence_polynomial_cycle(d).unwrap(), th);
            assert!((v - t).abs() <= 1e-12 * t);
        }
    }

    #[test]
    fn theta_is_correctly_rounded_for_closed_forms() {
        assert_eq!(theta_t(3, 2.0).unwrap(), 1.0 / 3.0);
        assert_eq!(phi(3, 2.0, Regime::Dense).unwrap(), 1.0 / 3.0);
        // 1 + 4θ + 2θ² = 3 at θ = √2 − 1.
        assert_abs_diff_eq!(theta_t(4, 3.0).unwrap(), 2f64.sqrt() - 1.0, epsilon = 2.0 * f64::EPSILON);
        for t in [1.5, 2.5, 10.0] {
            assert_abs_diff_eq!(theta_t(3, t).unwrap(), (t - 1.0) / 3.0, epsilon = f64::EPSILON * t);
        }
    }

    #[test]
    fn theta_is_increasing() {
        let mut last = -1.0;
        for k in 0..40 {
            let th = theta_t(6, 1.0 + 0.25 * k as f64).unwrap();
            assert!(th > last);
            last = th;
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(3, 1.0, Regime::Dense).unwrap(), 0.0);
        assert_eq!(phi(3, 1.0, Regime::Sparse).unwrap(), 0.0);
        assert_abs_diff_eq!(phi(3, 2.0, Regime::Dense).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(phi(3, 2.0, Regime::Sparse).unwrap(), 0.5);
        for k in 0..20 {
            let t = 1.0 + 0.5 * k as f64;
            assert!(phi(4, t, Regime::Dense).unwrap() <= phi(4, t, Regime::Sparse).unwrap());
        }
    }

    #[test]
    fn two_block_trace_matches_dense() {
        let p = CycleProblem::new(17, 0.2, 3, 2.0).unwrap();
        for d in 3..=5u32 {
            for (kind, r) in [(CandidateKind::Clique(5), 5), (CandidateKind::Hub(3), 3), (CandidateKind::Clique(0), 0), (CandidateKind::Clique(17), 17)] {
                let y = candidate_matrix(&p, kind).unwrap();
                let direct = crate::linalg::trace_power_by_multiplication(&y, d);
                let c = if matches!(kind, CandidateKind::Hub(_)) { 1.0 } else { p.p };
                let closed = two_block_trace(17, r, 1.0, p.p, c, d);
                assert!((direct - closed).abs() <= 1e-9 * direct.abs().max(1.0), "{kind:?} d={d}");
            }
        }
    }

    #[test]
    fn planted_costs_match_dense_evaluation() {
        let p = CycleProblem::new(30, 0.2, 3, 2.0).unwrap();
        for c in [planted_clique(&p).unwrap(), planted_hub(&p).unwrap()] {
            let y = candidate_matrix(&p, c.kind).unwrap();
            assert_abs_diff_eq!(lambda_star_p(&y, p.p).unwrap(), c.cost, epsilon = 1e-9);
        }
        assert_eq!(planted_clique(&p).unwrap().kind, CandidateKind::Clique(6));
    }

    #[test]
    fn planted_candidates_at_scale() {
        let p = CycleProblem::new(3000, 0.1, 3, 2.0).unwrap();
        let clique = planted_clique(&p).unwrap();
        let hub = planted_hub(&p).unwrap();
        assert_eq!(clique.kind, CandidateKind::Clique(300));
        assert_eq!(hub.kind, CandidateKind::Hub(10));
        assert!((clique.cost_over_vn(&p) / 0.5 - 1.0).abs() <= 0.10);
        assert!((hub.cost_over_vn(&p) / (1.0 / 3.0) - 1.0).abs() <= 0.15);
    }

    #[test]
    fn planted_trivial_and_infeasible() {
        let p = CycleProblem::new(20, 0.3, 3, 1.0).unwrap();
        let c = planted_clique(&p).unwrap();
        assert_eq!((c.kind, c.cost), (CandidateKind::Clique(0), 0.0));
        let p = CycleProblem::new(10, 0.9, 3, 50.0).unwrap();
        assert!(matches!(planted_clique(&p), Err(LabError::Infeasible(_))));
    }

    #[test]
    fn trace_gradient_matches_finite_differences() {
        let mut g = rng::master(21);
        for d in [3u32, 4] {
            let y = SymMatrix::from_fn(7, |i, j| if i == j { 0.0 } else { g.random_range(0.1..1.0) });
            let grad = trace_power_gradient(&y, d);
            for (i, j, _) in y.off_diagonal().take(10).collect::<Vec<_>>() {
                let h = 1e-5;
                let mut up = y.clone();
                up.set(i, j, y.get(i, j) + h);
                let mut dn = y.clone();
                dn.set(i, j, y.get(i, j) - h);
                let fd = (crate::linalg::trace_power_by_multiplication(&up, d) - crate::linalg::trace_power_by_multiplication(&dn, d)) / (2.0 * h);
                assert!((fd - grad.get(i, j)).abs() <= 1e-6 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn objective_gradient_matches_finite_differences() {
        let p = CycleProblem::new(6, 0.3, 3, 1.5).unwrap();
        let obj = Objective { p: &p, floor: 0.03, mu: 7.0 };
        let mut g = rng::master(22);
        let z: Vec<f64> = (0..15).map(|_| g.random_range(-2.0..2.0)).collect();
        let (_, grad) = obj.eval(&z, true);
        for k in 0..15 {
            let h = 1e-6;
            let mut up = z.clone();
            up[k] += h;
            let mut dn = z.clone();
            dn[k] -= h;
            let fd = (obj.eval(&up, false).0 - obj.eval(&dn, false).0) / (2.0 * h);
            assert!((fd - grad[k]).abs() <= 1e-6 * fd.abs().max(1e-3));
        }
    }

    #[test]
    fn numeric_phi_small_instance() {
        let p = CycleProblem::new(12, 0.3, 3, 1.5).unwrap();
        let r = numeric_phi(&p, &PhiConfig::default()).unwrap();
        assert!(r.best.is_feasible(&p));
        let y = r.best.y.as_ref().unwrap();
        assert!(y.has_zero_diagonal());
        assert!(y.off_diagonal().all(|(_, _, v)| v >= p.p && v <= 1.0));
        let clique = smallest_feasible_clique(&p).unwrap().unwrap();
        let hub = smallest_feasible_hub(&p).unwrap().unwrap();
        assert!(r.best.cost <= clique.cost.min(hub.cost) + 1e-6);
        assert!(numeric_phi(&CycleProblem::new(61, 0.3, 3, 1.5).unwrap(), &PhiConfig::default()).is_err());
    }

    #[test]
    fn er_sample_properties() {
        let mut g = rng::master(23);
        let x = er_sample(25, 0.4, &mut g).unwrap();
        assert!(x.has_zero_diagonal());
        assert!(x.off_diagonal().all(|(_, _, v)| v == 0.0 || v == 1.0));
        assert!(er_sample(5, 1.5, &mut g).is_err());
    }

    #[test]
    fn triangle_trace_identity() {
        let mut g = rng::master(24);
        for n in [5, 12, 30] {
            let x = er_sample(n, 0.35, &mut g).unwrap();
            let mut triangles = 0u128;
            for a in 0..n {
                for b in (a + 1)..n {
                    for c in (b + 1)..n {
                        if x.get(a, b) == 1.0 && x.get(b, c) == 1.0 && x.get(a, c) == 1.0 {
                            triangles += 1;
                        }
                    }
                }
            }
            assert_eq!(exact_adjacency_trace(&x, 3).unwrap(), 6 * triangles);
            assert_abs_diff_eq!(adjacency_trace(&x, 3).unwrap(), (6 * triangles) as f64, epsilon = 1e-6);
        }
    }

    #[test]
    fn trace_tail_examples() {
        let p = CycleProblem::new(30, 0.999, 3, 1.0).unwrap();
        let r = trace_tail_mc(&p, &[0.5], 100, 1).unwrap();
        let complete = SymMatrix::from_fn(30, |i, j| if i == j { 0.0 } else { 1.0 });
        let oracle = crate::linalg::trace_power(&complete, 3).unwrap() / (30.0f64 * 0.999).powi(3);
        assert!((r.mean.mean / oracle - 1.0).abs() <= 0.02);
        assert_eq!(r.tail_freq, vec![(0.5, 1.0)]);

        let p = CycleProblem::new(60, 0.2, 3, 1.0).unwrap();
        let r = trace_tail_mc(&p, &[], 400, 2).unwrap();
        let expected = 60.0 * 59.0 * 58.0 * 0.2f64.powi(3) / (60.0f64 * 0.2).powi(3);
        assert!(r.mean.within_sigmas(expected, 3.0));
        assert!(trace_tail_mc(&p, &[], 99, 2).is_err());
    }
}
