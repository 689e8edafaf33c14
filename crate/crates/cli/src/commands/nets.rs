use clap::{Args, ValueEnum};
use ldp_core::nets;
use ldp_core::{rng, LabError, Result};
use serde::Serialize;

use super::{params, Outcome};
use crate::report::{Cell, Report};

const NET_STREAM: u64 = 4;

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum NetChoice {
    Interval,
    Sphere,
    Lowrank,
    All,
}

/// Build nets, check coverage on fresh random targets and compare sizes
/// with their volumetric bounds.
///
/// CSV columns: construction, n, k, eps, cardinality, log_cardinality,
/// bound, worst_gap, samples, covered.  Without --n the standard cases are
/// the interval [-1, 1] at 0.1, the sphere in R^3 at 0.5 and the rank-k
/// nets (2,1,0.5), (3,1,0.6), (4,2,0.8).  `bound` is n log(12/ε) for
/// spheres and 2nk log(12k/ε) for rank-k nets.
#[derive(Args, Serialize, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = NetChoice::All)]
    pub kind: NetChoice,
    #[arg(long)]
    pub n: Option<usize>,
    /// Rank of the low-rank net.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
}

struct Case {
    kind: NetChoice,
    n: usize,
    k: usize,
    eps: f64,
}

fn cases(args: &VerifyArgs) -> Vec<Case> {
    let wanted = |k: NetChoice| args.kind == NetChoice::All || args.kind == k;
    let mut out = Vec::new();
    let mut add = |kind, n, k, eps| {
        if wanted(kind) {
            out.push(Case { kind, n, k, eps });
        }
    };
    match args.n {
        Some(n) => {
            add(NetChoice::Interval, 1, 1, args.eps);
            add(NetChoice::Sphere, n, 1, args.eps);
            add(NetChoice::Lowrank, n, args.k, args.eps);
        }
        None => {
            add(NetChoice::Interval, 1, 1, 0.1);
            add(NetChoice::Sphere, 3, 1, 0.5);
            add(NetChoice::Lowrank, 2, 1, 0.5);
            add(NetChoice::Lowrank, 3, 1, 0.6);
            add(NetChoice::Lowrank, 4, 2, 0.8);
        }
    }
    out
}

pub fn verify(args: &VerifyArgs, seed: u64) -> Result<Outcome> {
    let mut report = Report::new(
        "nets-verify",
        params(args),
        seed,
        &["construction", "n", "k", "eps", "cardinality", "log_cardinality", "bound", "worst_gap", "samples", "covered"],
    );
    let mut failed = Vec::new();
    for (i, c) in cases(args).into_iter().enumerate() {
        let mut g = rng::substream(seed, NET_STREAM, i as u64);
        let (name, card, log_card, bound, coverage) = match c.kind {
            NetChoice::Interval => {
                let net = nets::net_interval(-1.0, 1.0, c.eps)?;
                // Interval nets are exact grids; the gap is half the spacing.
                let spacing = if net.points.len() > 1 { net.points[1] - net.points[0] } else { 0.0 };
                let gap = nets::Coverage { samples: 0, worst_gap: 0.5 * spacing };
                (NetChoice::Interval, Some(net.cardinality as u128), net.log_cardinality, None, Some(gap))
            }
            NetChoice::Sphere => {
                let net = nets::net_sphere(c.n, c.eps, &mut g)?;
                (NetChoice::Sphere, Some(net.cardinality as u128), net.log_cardinality, net.bound, net.coverage)
            }
            NetChoice::Lowrank => {
                let net = nets::net_lowrank(c.n, c.k, c.eps, &mut g)?;
                (NetChoice::Lowrank, net.cardinality(), net.log_cardinality, Some(net.bound), net.coverage)
            }
            NetChoice::All => unreachable!("cases are concrete"),
        };
        let covered = coverage.is_some_and(|cov| cov.holds(c.eps));
        let within_bound = bound.is_none_or(|b| log_card <= b);
        if !covered || !within_bound {
            failed.push(i);
        }
        report.push(vec![
            Cell::Text(format!("{name:?}").to_lowercase()),
            c.n.into(),
            c.k.into(),
            c.eps.into(),
            card.and_then(|v| i64::try_from(v).ok()).map_or(Cell::Missing, Cell::Int),
            log_card.into(),
            bound.into(),
            coverage.map(|cov| cov.worst_gap).into(),
            coverage.map(|cov| cov.samples).into(),
            covered.into(),
        ]);
    }
    let failure = (!failed.is_empty()).then(|| LabError::Certification(format!("net checks failed for cases {failed:?}")));
    Ok(Outcome { report, warnings: Vec::new(), failure })
}
