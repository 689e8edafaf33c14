use clap::{Args, ValueEnum};
use ldp_core::{LabError, Law, Result};
use serde::Serialize;

use super::{grid, params, Outcome};
use crate::report::{Cell, Report};

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FamilyChoice {
    Rademacher,
    Bernoulli,
    Uniform,
    Gaussian,
    All,
}

/// Tabulate Λ(λ), the tilt mean Λ'(λ) and Λ*(Λ'(λ)) on a λ grid.
///
/// CSV columns: family, lambda, log_laplace, tilt_mean, tilt_variance,
/// legendre, duality_residual.  `duality_residual` is
/// |Λ*(Λ'(λ)) − (λΛ'(λ) − Λ(λ))|; any value above --tol exits with status 3.
#[derive(Args, Serialize, Debug, Clone)]
pub struct LegendreArgs {
    #[arg(long, value_enum, default_value_t = FamilyChoice::All)]
    pub family: FamilyChoice,
    /// Success probability of the Bernoulli law.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Half-width of the symmetric uniform law.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Variance of the Gaussian law.
    #[arg(long, default_value_t = 1.0)]
    pub var: f64,
    /// The grid is [-lambda_max, lambda_max].
    #[arg(long, default_value_t = 4.0)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

pub fn legendre(args: &LegendreArgs, seed: u64) -> Result<Outcome> {
    let laws = match args.family {
        FamilyChoice::Rademacher => vec![Law::rademacher()],
        FamilyChoice::Bernoulli => vec![Law::bernoulli(args.p)?],
        FamilyChoice::Uniform => vec![Law::uniform_sym(args.a)?],
        FamilyChoice::Gaussian => vec![Law::gaussian(args.var)?],
        FamilyChoice::All => vec![Law::rademacher(), Law::bernoulli(args.p)?, Law::uniform_sym(args.a)?, Law::gaussian(args.var)?],
    };
    if args.lambda_max.is_nan() || args.lambda_max < 0.0 {
        return Err(LabError::arg("--lambda-max must be nonnegative"));
    }
    let lambdas = grid(-args.lambda_max, args.lambda_max, args.points)?;
    let mut report = Report::new(
        "legendre",
        params(args),
        seed,
        &["family", "lambda", "log_laplace", "tilt_mean", "tilt_variance", "legendre", "duality_residual"],
    );
    let mut worst = 0.0f64;
    for law in &laws {
        for &lambda in &lambdas {
            let ll = law.log_laplace(lambda)?;
            let m = law.tilt_mean(lambda);
            let conj = law.legendre(m);
            let residual = (conj - (lambda * m - ll)).abs();
            worst = worst.max(residual);
            report.push(vec![
                law.name().into(),
                lambda.into(),
                ll.into(),
                m.into(),
                law.tilt_variance(lambda).into(),
                conj.into(),
                Cell::Float(residual),
            ]);
        }
    }
    let failure = (worst > args.tol)
        .then(|| LabError::Numerical { message: format!("duality residual exceeds tolerance {}", args.tol), residual: worst });
    Ok(Outcome { report, warnings: Vec::new(), failure })
}
