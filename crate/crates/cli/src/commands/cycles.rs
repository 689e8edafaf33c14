use std::path::PathBuf;

use clap::Args;
use ldp_core::cycles::{self, CandidateKind, CandidateMatrix, CycleProblem, PhiConfig, Regime};
use ldp_core::{LabError, Result};
use serde::Serialize;

use super::{export_matrix, grid, params, Outcome};
use crate::report::{Cell, Report};

/// θ_t and Φ(t) in both density regimes.
///
/// CSV columns: d, t, theta, clique_rate, phi_dense, phi_sparse, where
/// clique_rate is (t−1)^{2/d}/2.  Without --t the table covers [1, t_max].
#[derive(Args, Serialize, Debug, Clone)]
pub struct PhiArgs {
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Levels t >= 1 (repeatable).
    #[arg(long)]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

pub fn phi_table(args: &PhiArgs, seed: u64) -> Result<Outcome> {
    let levels = if args.t.is_empty() { grid(1.0, args.t_max, args.points)? } else { args.t.clone() };
    let mut report = Report::new("cycles-phi", params(args), seed, &["d", "t", "theta", "clique_rate", "phi_dense", "phi_sparse"]);
    for t in levels {
        let theta = cycles::theta_t(args.d, t)?;
        report.push(vec![
            args.d.into(),
            t.into(),
            theta.into(),
            (0.5 * (t - 1.0).powf(2.0 / args.d as f64)).into(),
            cycles::phi(args.d, t, Regime::Dense)?.into(),
            cycles::phi(args.d, t, Regime::Sparse)?.into(),
        ]);
    }
    Ok(report.into())
}

/// Planted clique and hub costs against their limiting rates.
///
/// CSV columns: t, candidate, kind, size, cost, cost_over_vn, reference,
/// trace_ratio, feasible.  Candidates are the planted clique and hub and
/// the smallest clique and hub meeting tr(Y^d) ≥ t(np)^d.  `reference` is
/// (t−1)^{2/d}/2 for cliques and θ_t for hubs; v_n = n²p^d log(1/p).
#[derive(Args, Serialize, Debug, Clone)]
pub struct CandidatesArgs {
    #[arg(long, default_value_t = 3000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Levels t > 1 (repeatable; default 2).
    #[arg(long)]
    pub t: Vec<f64>,
}

fn candidate_row(t: f64, name: &str, c: &CandidateMatrix, p: &CycleProblem, reference: f64) -> Vec<Cell> {
    let size = match c.kind {
        CandidateKind::Clique(r) => Cell::from(r),
        CandidateKind::Hub(s) => Cell::from(s),
        CandidateKind::Numeric => Cell::Missing,
    };
    vec![
        t.into(),
        name.into(),
        c.kind.label().into(),
        size,
        c.cost.into(),
        c.cost_over_vn(p).into(),
        reference.into(),
        c.trace_ratio.into(),
        c.is_feasible(p).into(),
    ]
}

pub fn candidates(args: &CandidatesArgs, seed: u64) -> Result<Outcome> {
    let levels = if args.t.is_empty() { vec![2.0] } else { args.t.clone() };
    let mut report = Report::new(
        "cycles-candidates",
        params(args),
        seed,
        &["t", "candidate", "kind", "size", "cost", "cost_over_vn", "reference", "trace_ratio", "feasible"],
    );
    for t in levels {
        let p = CycleProblem::new(args.n, args.p, args.d, t)?;
        let clique_rate = 0.5 * (t - 1.0).powf(2.0 / args.d as f64);
        let theta = cycles::theta_t(args.d, t)?;
        report.push(candidate_row(t, "planted-clique", &cycles::planted_clique(&p)?, &p, clique_rate));
        report.push(candidate_row(t, "planted-hub", &cycles::planted_hub(&p)?, &p, theta));
        if let Some(c) = cycles::smallest_feasible_clique(&p)? {
            report.push(candidate_row(t, "min-feasible-clique", &c, &p, clique_rate));
        }
        if let Some(c) = cycles::smallest_feasible_hub(&p)? {
            report.push(candidate_row(t, "min-feasible-hub", &c, &p, theta));
        }
    }
    Ok(report.into())
}

/// Penalty-method search for the cheapest weighted graph with
/// tr(Y^d) ≥ t(np)^d (n <= 60).
///
/// CSV columns: branch, cost, cost_over_vn, trace_ratio, feasible, best.
/// One row per solver branch; `best` marks the branch that was returned.
#[derive(Args, Serialize, Debug, Clone)]
pub struct OptArgs {
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 1.5)]
    pub t: f64,
    /// Penalty rounds; the weight grows tenfold per round.
    #[arg(long, default_value_t = 6)]
    pub rounds: usize,
    /// Projected-gradient steps per round.
    #[arg(long, default_value_t = 300)]
    pub iterations: usize,
    /// Random starts in addition to the planted and uniform ones.
    #[arg(long, default_value_t = 3)]
    pub random_starts: usize,
    /// Also write the best matrix as dense CSV.
    #[arg(long, value_name = "PATH")]
    pub export_matrix: Option<PathBuf>,
}

pub fn opt(args: &OptArgs, seed: u64) -> Result<Outcome> {
    let p = CycleProblem::new(args.n, args.p, args.d, args.t)?;
    if args.rounds == 0 || args.iterations == 0 {
        return Err(LabError::arg("--rounds and --iterations must be positive"));
    }
    let config = PhiConfig {
        rounds: args.rounds,
        inner_iterations: args.iterations,
        random_starts: args.random_starts,
        seed,
        ..PhiConfig::default()
    };
    let result = cycles::numeric_phi(&p, &config)?;
    if let (Some(path), Some(y)) = (&args.export_matrix, &result.best.y) {
        export_matrix(y, path)?;
    }
    let mut report = Report::new(
        "cycles-opt",
        params(args),
        seed,
        &["branch", "cost", "cost_over_vn", "trace_ratio", "feasible", "best"],
    );
    let v_n = p.v_n();
    for b in &result.branches {
        report.push(vec![
            b.label.clone().into(),
            b.cost.into(),
            (b.cost / v_n).into(),
            b.trace_ratio.into(),
            b.feasible.into(),
            (b.label == result.origin).into(),
        ]);
    }
    Ok(report.into())
}

/// Monte Carlo upper tail of tr(X^d)/(np)^d for X ~ G(n, p).
///
/// CSV columns: level, frequency, mean_ratio, mean_std_err, trials.
#[derive(Args, Serialize, Debug, Clone)]
pub struct McArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Tail levels (repeatable; default 1, 1.5, 2).
    #[arg(long)]
    pub t: Vec<f64>,
}

pub fn mc(args: &McArgs, seed: u64) -> Result<Outcome> {
    let levels = if args.t.is_empty() { vec![1.0, 1.5, 2.0] } else { args.t.clone() };
    let p = CycleProblem::new(args.n, args.p, args.d, levels.iter().copied().fold(1.0, f64::max))?;
    let tail = cycles::trace_tail_mc(&p, &levels, args.trials, seed)?;
    let mut report = Report::new("cycles-mc", params(args), seed, &["level", "frequency", "mean_ratio", "mean_std_err", "trials"]);
    for (level, freq) in tail.tail_freq {
        report.push(vec![level.into(), freq.into(), tail.mean.mean.into(), tail.mean.std_err.into(), args.trials.into()]);
    }
    Ok(report.into())
}
