use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ldp_core::ising::{self, GraphFamily, IsingProblem, DEFAULT_STARTS, MAX_CERTIFY_N, MAX_EXACT_N};
use ldp_core::{io, nets, rng, LabError, Matrix, Result};
use serde::Serialize;

use super::{export_matrix, params, Outcome};
use crate::report::{format_float, Cell, Report};

const GRAPH_STREAM: u64 = 1;
const SOLVER_STREAM: u64 = 2;
const WIDTH_STREAM: u64 = 3;

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GraphChoice {
    Star,
    Cycle,
    Complete,
    Er,
}

/// Where the coupling matrix comes from.
#[derive(Args, Serialize, Debug, Clone)]
pub struct CouplingArgs {
    /// Generated graph family, used when no file is given.
    #[arg(long, value_enum, default_value_t = GraphChoice::Er)]
    pub graph: GraphChoice,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Edge probability of the Erdős–Rényi family.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Multiplier applied to 0/1 adjacency matrices (default 1/√n).
    #[arg(long)]
    pub scale: Option<f64>,
    /// Edge list with one `u v` pair of 0-indexed vertices per line.
    #[arg(long, value_name = "PATH", conflicts_with = "coupling_file")]
    pub graph_file: Option<PathBuf>,
    /// Dense symmetric coupling matrix with zero diagonal, used as given.
    #[arg(long, value_name = "PATH")]
    pub coupling_file: Option<PathBuf>,
}

impl CouplingArgs {
    fn reads_file(&self) -> bool {
        self.graph_file.is_some() || self.coupling_file.is_some()
    }

    /// Coupling on `n` vertices; generated graphs draw from a stream keyed by `n`.
    fn coupling(&self, n: usize, seed: u64) -> Result<Matrix> {
        let open = |p: &PathBuf| File::open(p).map(BufReader::new).map_err(|e| LabError::Io(format!("{}: {e}", p.display())));
        if let Some(path) = &self.coupling_file {
            return io::read_dense_matrix(open(path)?);
        }
        let adjacency = match &self.graph_file {
            Some(path) => io::read_edge_list(open(path)?, None)?,
            None => {
                let family = match self.graph {
                    GraphChoice::Star => GraphFamily::Star,
                    GraphChoice::Cycle => GraphFamily::Cycle,
                    GraphChoice::Complete => GraphFamily::Complete,
                    GraphChoice::Er => GraphFamily::ErdosRenyi { p: self.p },
                };
                family.adjacency(n, &mut rng::substream(seed, GRAPH_STREAM, n as u64))?
            }
        };
        let scale = self.scale.unwrap_or(1.0 / (adjacency.n().max(1) as f64).sqrt());
        if !scale.is_finite() {
            return Err(LabError::arg("--scale must be finite"));
        }
        Ok(adjacency.scale(scale))
    }
}

/// Check log Z ≤ sup + log|net| + δ for couplings of size n_min..=n.
///
/// CSV columns: n, delta, sup, log_z, gap, net_log_card, upper_bound, slack,
/// net_kind, net_mesh, grid_spacing, bound_ok, mean_width, width_ratio,
/// op_norm, hs_norm.  `gap` is log Z − sup, `slack` is upper_bound − log Z,
/// `mean_width` is g = 2·E‖AΓ‖₁ and `width_ratio` is gap / (n^{1/3} g^{2/3}).
/// A row with bound_ok = false makes the exit status 3.
#[derive(Args, Serialize, Debug, Clone)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub coupling: CouplingArgs,
    /// Smallest size of the sweep (ignored for file input).
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Grid spacing of the pushforward net (default: coarsest admissible).
    #[arg(long)]
    pub mesh: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_STARTS)]
    pub starts: usize,
    /// Gaussian draws for the mean-width estimate.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

pub fn certify(args: &CertifyArgs, seed: u64) -> Result<Outcome> {
    let sizes: Vec<usize> = if args.coupling.reads_file() {
        vec![args.coupling.n]
    } else {
        if args.n_min < 2 || args.n_min > args.coupling.n {
            return Err(LabError::arg(format!("need 2 <= --n-min <= --n, got {} and {}", args.n_min, args.coupling.n)));
        }
        if args.coupling.n > MAX_CERTIFY_N {
            return Err(LabError::Resource(format!("certificates are limited to n <= {MAX_CERTIFY_N}")));
        }
        (args.n_min..=args.coupling.n).collect()
    };
    let mut report = Report::new(
        "ising-certify",
        params(args),
        seed,
        &[
            "n", "delta", "sup", "log_z", "gap", "net_log_card", "upper_bound", "slack", "net_kind", "net_mesh", "grid_spacing",
            "bound_ok", "mean_width", "width_ratio", "op_norm", "hs_norm",
        ],
    );
    let mut failed = Vec::new();
    for size in sizes {
        let a = args.coupling.coupling(size, seed)?;
        let n = a.n();
        let problem = IsingProblem::new(a.clone())?;
        let cert = ising::partition_certificate(&problem, args.delta, args.mesh, args.starts, &mut rng::substream(seed, SOLVER_STREAM, n as u64))?;
        let width = 2.0 * nets::gaussian_mean_width(&a, args.trials, &mut rng::substream(seed, WIDTH_STREAM, n as u64))?.mean;
        let gap = cert.log_z - cert.sup;
        let ratio = if width > 0.0 { Cell::Float(gap / ((n as f64).cbrt() * width.powf(2.0 / 3.0))) } else { Cell::Missing };
        let diag = ising::spectral_diagnostics(&a)?;
        if !cert.bound_ok {
            failed.push(n);
        }
        report.push(vec![
            n.into(),
            cert.delta.into(),
            cert.sup.into(),
            cert.log_z.into(),
            gap.into(),
            cert.net_log_card.into(),
            cert.upper_bound().into(),
            (cert.upper_bound() - cert.log_z).into(),
            cert.net_kind.as_str().into(),
            cert.net_mesh.into(),
            cert.grid_spacing.into(),
            cert.bound_ok.into(),
            width.into(),
            ratio,
            diag.op_norm.into(),
            diag.hs_norm.into(),
        ]);
    }
    let failure = (!failed.is_empty()).then(|| LabError::Certification(format!("bound violated for n in {failed:?}")));
    Ok(Outcome { report, warnings: Vec::new(), failure })
}

/// Mean-field supremum with the exact log-partition function as oracle.
///
/// CSV columns: n, sup, log_z, gap, starts_used, converged, residual, x_star.
/// `log_z` and `gap` are empty above n = 24; `x_star` lists the maximizer's
/// coordinates separated by `;`.
#[derive(Args, Serialize, Debug, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[arg(long, default_value_t = DEFAULT_STARTS)]
    pub starts: usize,
    /// Also write the coupling matrix as dense CSV.
    #[arg(long, value_name = "PATH")]
    pub export_matrix: Option<PathBuf>,
}

pub fn solve(args: &SolveArgs, seed: u64) -> Result<Outcome> {
    let a = args.coupling.coupling(args.coupling.n, seed)?;
    if let Some(path) = &args.export_matrix {
        export_matrix(&a, path)?;
    }
    let n = a.n();
    let problem = IsingProblem::new(a)?;
    let sol = ising::meanfield_sup(&problem, args.starts, &mut rng::substream(seed, SOLVER_STREAM, n as u64))?;
    let log_z = if n <= MAX_EXACT_N { Some(ising::exact_log_partition(&problem)?) } else { None };
    let mut report = Report::new(
        "ising-solve",
        params(args),
        seed,
        &["n", "sup", "log_z", "gap", "starts_used", "converged", "residual", "x_star"],
    );
    let x_star: Vec<String> = sol.x_star.iter().map(|&v| format_float(v)).collect();
    report.push(vec![
        n.into(),
        sol.value.into(),
        log_z.into(),
        log_z.map(|z| z - sol.value).into(),
        sol.starts_used.into(),
        sol.converged.into(),
        sol.residual.into(),
        x_star.join(";").into(),
    ]);
    Ok(report.into())
}
