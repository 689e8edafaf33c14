use clap::Args;
use ldp_core::wigner::{self, Beta, WignerEnsemble};
use ldp_core::{rng, LabError, Result};
use serde::Serialize;

use super::{grid, params, Ensemble, Outcome};
use crate::report::{Cell, Report};

/// Tabulate the rate J_d(t) on [0, t_max].
///
/// CSV columns: t, j.
#[derive(Args, Serialize, Debug, Clone)]
pub struct RateArgs {
    #[arg(long, default_value_t = 4)]
    pub d: u32,
    /// 1 for real symmetric, 2 for complex Hermitian entries.
    #[arg(long, default_value_t = 1)]
    pub beta: u32,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

pub fn rate(args: &RateArgs, seed: u64) -> Result<Outcome> {
    let beta = Beta::from_int(args.beta)?;
    let curve = wigner::rate_curve_j(args.d, beta, &grid(0.0, args.t_max, args.points)?)?;
    let mut report = Report::new("wigner-rate", params(args), seed, &["t", "j"]);
    for (t, j) in curve.points {
        report.push(vec![t.into(), j.into()]);
    }
    Ok(report.into())
}

/// Trace moments of X/√n and tilted estimates of their upper tails.
///
/// CSV columns: record, order, threshold, estimate, std_err, reference,
/// rate_est, ess, tilt_lambda.  `moment` rows give the mean of
/// (1/n)tr(X/√n)^k for k = 1..d with the semicircle moment as reference;
/// `tail` rows give P((1/n)tr(X/√n)^d ≥ threshold) by importance sampling.
#[derive(Args, Serialize, Debug, Clone)]
pub struct McArgs {
    #[arg(long, value_enum, default_value_t = Ensemble::Rademacher)]
    pub ensemble: Ensemble,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub d: u32,
    /// Samples for the moments and for each tail estimate.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Tail thresholds (repeatable; default: semicircle moment + 0.5).
    #[arg(long)]
    pub t: Vec<f64>,
}

pub fn mc(args: &McArgs, seed: u64) -> Result<Outcome> {
    let e = match args.ensemble {
        Ensemble::Rademacher => WignerEnsemble::rademacher(args.n)?,
        Ensemble::Gaussian => WignerEnsemble::gaussian(args.n)?,
        Ensemble::Uniform => WignerEnsemble::uniform(args.n)?,
    };
    if args.d == 0 {
        return Err(LabError::arg("--d must be at least 1"));
    }
    let m_d = wigner::semicircle_moment(args.d)?;
    let thresholds = if args.t.is_empty() { vec![m_d + 0.5] } else { args.t.clone() };
    let mut report = Report::new(
        "wigner-mc",
        params(args),
        seed,
        &["record", "order", "threshold", "estimate", "std_err", "reference", "rate_est", "ess", "tilt_lambda"],
    );
    let moments = wigner::wigner_moments(&e, args.d, args.trials, rng::mix(seed))?;
    for (k, est) in (1..=args.d).zip(moments) {
        report.push(vec![
            "moment".into(),
            k.into(),
            Cell::Missing,
            est.mean.into(),
            est.std_err.into(),
            wigner::semicircle_moment(k)?.into(),
            Cell::Missing,
            Cell::Missing,
            Cell::Missing,
        ]);
    }
    let mut warnings = Vec::new();
    for (i, &t) in thresholds.iter().enumerate() {
        let tail = wigner::tilted_tail_estimate(&e, args.d, t, args.trials, rng::mix(seed.wrapping_add(1 + i as u64)))?;
        if let Some(w) = tail.warning {
            warnings.push(format!("threshold {t}: {w}"));
        }
        report.push(vec![
            "tail".into(),
            args.d.into(),
            t.into(),
            tail.prob_est.into(),
            tail.std_err.into(),
            Cell::Missing,
            tail.rate_est.into(),
            tail.ess.into(),
            tail.tilt_lambda.into(),
        ]);
    }
    Ok(Outcome { report, warnings, failure: None })
}

/// Uniform-shift candidates y(J − I) with tr(Y^d) = x n^{1+d/2}.
///
/// CSV columns: n, d, x, y_value, trace_check, cost, small_shift_limit.
/// `trace_check` is tr(Y^d)/(x n^{1+d/2}) by matrix multiplication, `cost`
/// is Σ_{i<j} Λ*(y)/n^{1+2/d} and `small_shift_limit` is |x|^{2/d}/4.  A
/// trace check off by more than --tol exits with status 3.
#[derive(Args, Serialize, Debug, Clone)]
pub struct ShiftArgs {
    #[arg(long, value_enum, default_value_t = Ensemble::Rademacher)]
    pub law: Ensemble,
    #[arg(long, default_value_t = 4)]
    pub d: u32,
    /// Matrix sizes (repeatable; default 10, 100, 500).
    #[arg(long)]
    pub n: Vec<usize>,
    /// Trace levels (repeatable; default 0.5, 1, 2).
    #[arg(long)]
    pub x: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

pub fn shift(args: &ShiftArgs, seed: u64) -> Result<Outcome> {
    let sizes = if args.n.is_empty() { vec![10, 100, 500] } else { args.n.clone() };
    let levels = if args.x.is_empty() { vec![0.5, 1.0, 2.0] } else { args.x.clone() };
    let law = args.law.law();
    let mut report = Report::new(
        "wigner-shift",
        params(args),
        seed,
        &["n", "d", "x", "y_value", "trace_check", "cost", "small_shift_limit"],
    );
    let mut worst = 0.0f64;
    for &n in &sizes {
        for &x in &levels {
            let c = wigner::uniform_shift_candidate(n, args.d, x, &law)?;
            worst = worst.max((c.trace_check - 1.0).abs());
            report.push(vec![
                n.into(),
                args.d.into(),
                x.into(),
                c.y_value.into(),
                c.trace_check.into(),
                c.cost.into(),
                (0.25 * x.abs().powf(2.0 / args.d as f64)).into(),
            ]);
        }
    }
    let failure = (worst > args.tol)
        .then(|| LabError::Numerical { message: format!("trace identity off by more than {}", args.tol), residual: worst });
    Ok(Outcome { report, warnings: Vec::new(), failure })
}
