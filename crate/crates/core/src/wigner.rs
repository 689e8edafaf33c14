//! Wigner matrices: sampling, semicircle moments, the rate function `J_d`,
//! truncated traces, the uniform-shift candidate and tilted tail estimates.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::linalg::{eigen_symmetric, eigenvalues_symmetric, trace_power_by_multiplication, DenseMatrix, SymMatrix};
use crate::measures::{Family, ScalarLaw, TiltedLaw};
use crate::rng::{self, Stream};
use crate::stats::{CompensatedSum, Estimate};

/// Tilted barycenters are kept this fraction of the way to a finite support edge.
pub const INTERIOR_FRACTION: f64 = 0.95;
/// Effective sample sizes below this are flagged as unreliable.
pub const MIN_ESS: f64 = 10.0;
/// Fewest trials accepted by [`tilted_tail_estimate`].
pub const MIN_TAIL_TRIALS: usize = 1000;

/// Symmetric random matrix with i.i.d. centered unit-variance entries above
/// the diagonal and i.i.d. diagonal entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerEnsemble {
    pub n: usize,
    pub entry_law: ScalarLaw<f64>,
    pub diag_law: ScalarLaw<f64>,
}

impl WignerEnsemble {
    pub fn new(n: usize, entry_law: ScalarLaw<f64>, diag_law: ScalarLaw<f64>) -> Result<Self> {
        if n == 0 {
            return Err(LabError::arg("Wigner matrices need n >= 1"));
        }
        if entry_law.mean().abs() > 1e-12 || (entry_law.variance() - 1.0).abs() > 1e-12 {
            return Err(LabError::Domain(format!(
                "off-diagonal law must be centered with unit variance, got mean {} and variance {}",
                entry_law.mean(),
                entry_law.variance()
            )));
        }
        Ok(WignerEnsemble { n, entry_law, diag_law })
    }

    /// Rademacher entries, including the diagonal.
    pub fn rademacher(n: usize) -> Result<Self> {
        Self::new(n, ScalarLaw::rademacher(), ScalarLaw::rademacher())
    }

    /// Standard Gaussian entries, including the diagonal.
    pub fn gaussian(n: usize) -> Result<Self> {
        let g = ScalarLaw::gaussian(1.0)?;
        Self::new(n, g, g)
    }

    /// Uniform entries on `[-√3, √3]`, including the diagonal.
    pub fn uniform(n: usize) -> Result<Self> {
        let u = ScalarLaw::uniform_sym(3f64.sqrt())?;
        Self::new(n, u, u)
    }
}

/// Draws the upper triangle row by row, diagonal entry first in each row.
pub fn wigner_sample<R: Rng + ?Sized>(e: &WignerEnsemble, rng: &mut R) -> SymMatrix<f64> {
    SymMatrix::from_fn(e.n, |i, j| if i == j { e.diag_law.sample(rng) } else { e.entry_law.sample(rng) })
}

/// Catalan number `C_m` as an exact 64-bit integer.
pub fn catalan(m: u32) -> Result<u64> {
    let mut c: u128 = 1;
    for k in 0..m as u128 {
        // C_{k+1} = C_k · 2(2k+1)/(k+2), exact at every step.
        c = c * 2 * (2 * k + 1) / (k + 2);
        if c > u64::MAX as u128 {
            return Err(LabError::Range(format!("Catalan number C_{m} exceeds 64 bits")));
        }
    }
    Ok(c as u64)
}

/// `d`-th moment of the semicircle law: `C_{d/2}` for even `d`, else 0.
pub fn semicircle_moment(d: u32) -> Result<f64> {
    if d == 0 {
        return Err(LabError::arg("moment order must be >= 1"));
    }
    if d % 2 == 1 {
        Ok(0.0)
    } else {
        Ok(catalan(d / 2)? as f64)
    }
}

/// Real (`β = 1`) or complex (`β = 2`) symmetry class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beta {
    Real,
    Complex,
}

impl Beta {
    pub fn value(&self) -> f64 {
        match self {
            Beta::Real => 1.0,
            Beta::Complex => 2.0,
        }
    }

    pub fn from_int(b: u32) -> Result<Self> {
        match b {
            1 => Ok(Beta::Real),
            2 => Ok(Beta::Complex),
            _ => Err(LabError::arg(format!("beta must be 1 or 2, got {b}"))),
        }
    }
}

/// `J_d(x)`: `(β/4)(x − C_{d/2})^{2/d}` for even `d` and `x ≥ C_{d/2}`
/// (`+inf` below), `(β/4)|x|^{2/d}` for odd `d`.
pub fn rate_j(d: u32, beta: Beta, x: f64) -> Result<f64> {
    if d < 3 {
        return Err(LabError::arg(format!("J_d needs d >= 3, got {d}")));
    }
    let b = beta.value() / 4.0;
    let e = 2.0 / d as f64;
    if d.is_multiple_of(2) {
        let c = semicircle_moment(d)?;
        Ok(if x >= c { b * (x - c).powf(e) } else { f64::INFINITY })
    } else {
        Ok(b * x.abs().powf(e))
    }
}

/// Sampled rate function.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub speed_desc: String,
}

/// `J_d` on the strictly increasing grid `ts`.
pub fn rate_curve_j(d: u32, beta: Beta, ts: &[f64]) -> Result<RateCurve> {
    if ts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LabError::arg("rate curve grid must be strictly increasing"));
    }
    let points = ts.iter().map(|&t| rate_j(d, beta, t).map(|v| (t, v))).collect::<Result<_>>()?;
    Ok(RateCurve { name: format!("J_{d}"), points, speed_desc: format!("n^(1+2/{d})") })
}

/// `(1/n) Σ` of the `k` largest eigenvalues of `(Y/√n)^d` for even `d`; for
/// odd `d` the same quantity for `Y_+` minus that for `Y_−`.
pub fn truncated_trace(y: &SymMatrix<f64>, k: usize, d: u32) -> Result<f64> {
    let n = y.n();
    if k == 0 || k > n {
        return Err(LabError::arg(format!("truncation level must lie in 1..={n}, got {k}")));
    }
    if d == 0 {
        return Err(LabError::arg("power must be >= 1"));
    }
    let nf = n as f64;
    let scale = nf.sqrt();
    let values = eigenvalues_symmetric(y)?;
    let top = |mut powers: Vec<f64>| -> f64 {
        powers.sort_by(|a, b| b.total_cmp(a));
        powers.iter().take(k).sum()
    };
    let pw = |v: f64| (v / scale).powi(d as i32);
    Ok(if d.is_multiple_of(2) {
        top(values.iter().map(|&v| pw(v)).collect()) / nf
    } else {
        let pos = top(values.iter().map(|&v| pw(v.max(0.0))).collect());
        let neg = top(values.iter().map(|&v| pw((-v).max(0.0))).collect());
        (pos - neg) / nf
    })
}

/// `(1/n) tr(X/√n)^j` for `j = 1..=dmax`, by repeated multiplication.
pub fn normalized_trace_moments(x: &SymMatrix<f64>, dmax: u32) -> Vec<f64> {
    let n = x.n() as f64;
    let dense = x.to_dense();
    let mut out = Vec::with_capacity(dmax as usize);
    let mut pw: Option<DenseMatrix<f64>> = None;
    for j in 1..=dmax {
        let next = match pw {
            None => dense.clone(),
            Some(ref p) => p.matmul(&dense),
        };
        out.push(next.trace() / n.powf(1.0 + j as f64 / 2.0));
        pw = Some(next);
    }
    out
}

/// Monte Carlo means of `(1/n) tr(X/√n)^j`, `j = 1..=dmax`.  Sample `i`
/// uses stream `i` of `seed`.
pub fn wigner_moments(e: &WignerEnsemble, dmax: u32, samples: usize, seed: u64) -> Result<Vec<Estimate>> {
    if samples == 0 || dmax == 0 {
        return Err(LabError::arg("need at least one sample and one moment"));
    }
    let rows: Vec<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| normalized_trace_moments(&wigner_sample(e, &mut rng::stream(seed, i as u64)), dmax))
        .collect();
    Ok((0..dmax as usize).map(|j| Estimate::from_samples(&rows.iter().map(|r| r[j]).collect::<Vec<_>>())).collect())
}

/// Constant off-diagonal matrix `y(J − I)` with `tr(Y^d) = x n^{1+d/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCandidate {
    /// The common off-diagonal value.
    pub y_value: f64,
    pub y: SymMatrix<f64>,
    /// `tr(Y^d) / (x n^{1+d/2})` computed by matrix multiplication; 1 when `x = 0`.
    pub trace_check: f64,
    /// `Σ_{i<j} Λ*(y) / n^{1+2/d}`.
    pub cost: f64,
}

/// Off-diagonal value of the uniform shift.  The spectrum of `y(J − I)` is
/// `y(n−1)` once and `−y` with multiplicity `n−1`, so
/// `tr(Y^d) = y^d((n−1)^d + (n−1))` for even `d` and
/// `y^d((n−1)^d − (n−1))` for odd `d`.
pub fn uniform_shift_value(n: usize, d: u32, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(LabError::arg("uniform shift needs n >= 2"));
    }
    if d == 0 {
        return Err(LabError::arg("power must be >= 1"));
    }
    if !x.is_finite() || (d.is_multiple_of(2) && x < 0.0) {
        return Err(LabError::arg(format!("shift level must be finite and, for even d, nonnegative; got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let (nf, df) = (n as f64, d as f64);
    let m = nf - 1.0;
    let denom = if d.is_multiple_of(2) { m.powi(d as i32) + m } else { m.powi(d as i32) - m };
    if denom <= 0.0 {
        return Err(LabError::Infeasible(format!("no constant shift reaches a nonzero trace for n = {n}, d = {d}")));
    }
    let mag = (x.abs() / denom).powf(1.0 / df) * nf.powf(0.5 + 1.0 / df);
    Ok(mag.copysign(x))
}

pub fn uniform_shift_candidate(n: usize, d: u32, x: f64, law: &ScalarLaw<f64>) -> Result<ShiftCandidate> {
    let y_value = uniform_shift_value(n, d, x)?;
    let y = SymMatrix::from_fn(n, |i, j| if i == j { 0.0 } else { y_value });
    let nf = n as f64;
    let trace_check = if x == 0.0 { 1.0 } else { trace_power_by_multiplication(&y, d) / (x * nf.powf(1.0 + d as f64 / 2.0)) };
    let pairs = nf * (nf - 1.0) / 2.0;
    let cost = pairs * law.legendre(y_value) / nf.powf(1.0 + 2.0 / d as f64);
    Ok(ShiftCandidate { y_value, y, trace_check, cost })
}

/// Importance-sampling estimate of `P((1/n) tr(X/√n)^d ≥ t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailEstimate {
    pub prob_est: f64,
    pub std_err: f64,
    /// `−log(prob_est) / n^{1+2/d}`.
    pub rate_est: f64,
    /// `(Σw)² / Σw²` over all trials.
    pub ess: f64,
    /// Off-diagonal tilt barycenter and parameter.
    pub tilt_mean: f64,
    pub tilt_lambda: f64,
    pub warning: Option<String>,
}

/// Off-diagonal entries are drawn from the exponential tilt whose mean is
/// the uniform-shift value for `x = t − m_d` (no tilt when `t ≤ m_d`), kept
/// inside the support for bounded laws; the diagonal is untilted.  Each
/// trial contributes `1{event}·exp(−Σ_{i<j}(λ X_ij − Λ(λ)))`.  Trial `i`
/// uses stream `i` of `seed` and sums run in trial order.
pub fn tilted_tail_estimate(e: &WignerEnsemble, d: u32, t: f64, trials: usize, seed: u64) -> Result<TailEstimate> {
    if trials < MIN_TAIL_TRIALS {
        return Err(LabError::arg(format!("tail estimates need at least {MIN_TAIL_TRIALS} trials, got {trials}")));
    }
    if e.n < 2 {
        return Err(LabError::arg("tail estimates need n >= 2"));
    }
    if t.is_nan() {
        return Err(LabError::arg("threshold must not be NaN"));
    }
    let n = e.n;
    let nf = n as f64;
    let m_d = semicircle_moment(d)?;
    let x = if t.is_finite() { (t - m_d).max(0.0) } else if t > 0.0 { return Err(LabError::arg("threshold must not be +inf")) } else { 0.0 };
    let tilt = if x > 0.0 {
        let y = uniform_shift_value(n, d, x)?;
        let y = e.entry_law.clamp_interior(y, INTERIOR_FRACTION);
        TiltedLaw::from_mean(e.entry_law, y)?
    } else {
        TiltedLaw::from_lambda(e.entry_law, 0.0)?
    };
    let lambda = tilt.lambda();
    let log_mgf = e.entry_law.log_laplace(lambda)?;
    let pairs = nf * (nf - 1.0) / 2.0;
    let norm = nf.powf(1.0 + d as f64 / 2.0);

    let draws: Vec<(f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let mut off_sum = CompensatedSum::new();
            let xm = SymMatrix::from_fn(n, |a, b| {
                if a == b {
                    e.diag_law.sample(&mut r)
                } else {
                    let v = tilt.sample(&mut r);
                    off_sum.add(v);
                    v
                }
            });
            let log_w = if lambda == 0.0 { 0.0 } else { -(lambda * off_sum.value() - pairs * log_mgf) };
            let hit = t == f64::NEG_INFINITY || trace_power_by_multiplication(&xm, d) / norm >= t;
            (log_w.exp(), hit)
        })
        .collect();

    let contributions: Vec<f64> = draws.iter().map(|&(w, hit)| if hit { w } else { 0.0 }).collect();
    let est = Estimate::from_samples(&contributions);
    let mut sw = CompensatedSum::new();
    let mut sw2 = CompensatedSum::new();
    for &(w, _) in &draws {
        sw.add(w);
        sw2.add(w * w);
    }
    let ess = if sw2.value() > 0.0 { sw.value() * sw.value() / sw2.value() } else { 0.0 };
    let warning = (ess < MIN_ESS).then(|| format!("effective sample size {ess:.2} is below {MIN_ESS}; estimate unreliable"));
    Ok(TailEstimate {
        prob_est: est.mean,
        std_err: est.std_err,
        rate_est: -est.mean.ln() / nf.powf(1.0 + 2.0 / d as f64),
        ess,
        tilt_mean: tilt.mean_y(),
        tilt_lambda: lambda,
        warning,
    })
}

/// Outcome of checking the variational formula for `T_f(X) = Σ_{i≤k} f(λ_i(X))`
/// with `f(x) = x_+^d` and `ζ = f'`.
#[derive(Debug, Clone, PartialEq)]
pub struct FnsupReport {
    pub t_f: f64,
    /// `|T_f(X) − Ψ(Z*)|` at the top-`k` spectral truncation `Z*`.
    pub equality_gap: f64,
    /// Largest `Ψ(Z) − T_f(X)` over random trials (should be `≤ 0`).
    pub max_excess: f64,
    pub trials: usize,
    pub violations: usize,
    pub holds: bool,
}

fn pos_pow(x: f64, d: u32) -> f64 {
    x.max(0.0).powi(d as i32)
}

fn pos_pow_derivative(x: f64, d: u32) -> f64 {
    d as f64 * x.max(0.0).powi(d as i32 - 1)
}

/// `Ψ(Z) = tr f(Z) + tr ζ(Z)(X − Z)`.
pub fn fnsup_objective(x: &SymMatrix<f64>, z: &SymMatrix<f64>, d: u32) -> Result<f64> {
    let ez = eigen_symmetric(z)?;
    let tr_f: f64 = ez.values.iter().map(|&v| pos_pow(v, d)).sum();
    let zeta = ez.apply(|v| pos_pow_derivative(v, d));
    Ok(tr_f + zeta.inner(&x.sub(z)))
}

/// Random symmetric matrix of rank at most `k`: orthonormal directions with
/// levels uniform in `[-level, level]`.
fn random_low_rank<R: Rng + ?Sized>(n: usize, k: usize, level: f64, rng: &mut R) -> SymMatrix<f64> {
    let mut z = crate::nets::sample_low_rank(n, k, rng);
    if level != 1.0 {
        z = z.scale(level);
    }
    z
}

/// Checks `Ψ(Z*) = T_f(X)` and `Ψ(Z) ≤ T_f(X)` for `trials` random rank-`≤k`
/// matrices `Z` (plus `Z = 0`), with tolerance `1e-8·max(1, T_f)`.
pub fn fnsup_check(x: &SymMatrix<f64>, k: usize, d: u32, trials: usize, rng: &mut Stream) -> Result<FnsupReport> {
    let n = x.n();
    if k == 0 || k > n {
        return Err(LabError::arg(format!("rank bound must lie in 1..={n}, got {k}")));
    }
    if d < 2 {
        return Err(LabError::arg("fnsup check needs d >= 2 so that f is differentiable"));
    }
    let e = eigen_symmetric(x)?;
    let t_f: f64 = e.values.iter().take(k).map(|&v| pos_pow(v, d)).sum();
    let mut z_star = SymMatrix::zeros(n);
    for (v, u) in e.values.iter().zip(&e.vectors).take(k) {
        z_star.add_outer(*v, u);
    }
    let equality_gap = (fnsup_objective(x, &z_star, d)? - t_f).abs();
    let tol = 1e-8 * t_f.abs().max(1.0);
    let level = 2.0 * e.spectral_radius().max(1e-3);
    let mut max_excess = fnsup_objective(x, &SymMatrix::zeros(n), d)? - t_f;
    let mut violations = usize::from(max_excess > tol);
    for _ in 0..trials {
        let kk = rng.random_range(1..=k);
        let z = random_low_rank(n, kk, level, rng);
        let excess = fnsup_objective(x, &z, d)? - t_f;
        if excess > tol {
            violations += 1;
        }
        max_excess = max_excess.max(excess);
    }
    Ok(FnsupReport { t_f, equality_gap, max_excess, trials, violations, holds: violations == 0 && equality_gap <= tol })
}

/// Whether the law's exponential tilts stay inside its family.
pub fn tilts_in_family(law: &ScalarLaw<f64>) -> bool {
    matches!(law.family(), Family::Gaussian { .. } | Family::Rademacher)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{negative_part, positive_part};
    use approx::assert_abs_diff_eq;

    #[test]
    fn catalan_examples() {
        assert_eq!(catalan(0).unwrap(), 1);
        assert_eq!(catalan(1).unwrap(), 1);
        assert_eq!(catalan(2).unwrap(), 2);
        assert_eq!(catalan(5).unwrap(), 42);
        assert_eq!(catalan(36).unwrap(), 11_959_798_385_860_453_492);
        assert!(matches!(catalan(37), Err(LabError::Range(_))));
    }

    #[test]
    fn catalan_recurrence() {
        let c: Vec<u64> = (0..20).map(|m| catalan(m).unwrap()).collect();
        for m in 0..19 {
            let rec: u64 = (0..=m).map(|i| c[i] * c[m - i]).sum();
            assert_eq!(c[m + 1], rec);
        }
    }

    #[test]
    fn semicircle_examples() {
        assert_eq!(semicircle_moment(3).unwrap(), 0.0);
        assert_eq!(semicircle_moment(2).unwrap(), 1.0);
        assert_eq!(semicircle_moment(6).unwrap(), 5.0);
        assert!(semicircle_moment(0).is_err());
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate_j(4, Beta::Real, 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(rate_j(4, Beta::Real, 3.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(rate_j(3, Beta::Real, -8.0).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(rate_j(4, Beta::Real, 1.5).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(rate_j(4, Beta::Complex, 3.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(rate_j(2, Beta::Real, 3.0).is_err());
    }

    #[test]
    fn rate_monotone_and_right_continuous() {
        for d in [4u32, 6] {
            let c = semicircle_moment(d).unwrap();
            for h in [1e-3, 1e-6, 1e-9] {
                assert!(rate_j(d, Beta::Real, c + h).unwrap() <= h.powf(2.0 / d as f64));
            }
            let mut last = 0.0;
            for k in 0..50 {
                let v = rate_j(d, Beta::Real, c + 0.1 * k as f64).unwrap();
                assert!(v >= last);
                last = v;
            }
        }
        let curve = rate_curve_j(3, Beta::Real, &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(curve.points.len(), 3);
        assert!(rate_curve_j(3, Beta::Real, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn truncated_trace_full_and_identity() {
        let mut g = rng::master(1);
        let e = WignerEnsemble::gaussian(7).unwrap();
        let y = wigner_sample(&e, &mut g);
        for d in [2u32, 3, 4, 5] {
            let full = trace_power_by_multiplication(&y, d) / 7f64.powf(1.0 + d as f64 / 2.0);
            assert_abs_diff_eq!(truncated_trace(&y, 7, d).unwrap(), full, epsilon = 1e-10);
        }
        let n = 9;
        let v = truncated_trace(&SymMatrix::identity(n), 1, 4).unwrap();
        assert_abs_diff_eq!(v, (n as f64).powf(-3.0), epsilon = 1e-15);
        assert!(truncated_trace(&y, 0, 2).is_err());
        assert!(truncated_trace(&y, 8, 2).is_err());
    }

    #[test]
    fn truncated_trace_odd_matches_parts() {
        let mut g = rng::master(2);
        let y = wigner_sample(&WignerEnsemble::uniform(8).unwrap(), &mut g);
        let (k, d) = (3usize, 3u32);
        let s = 8f64.sqrt();
        let top_k = |m: &SymMatrix<f64>| -> f64 {
            let powered = eigen_symmetric(&m.scale(1.0 / s)).unwrap().apply(|v| v.powi(d as i32));
            eigenvalues_symmetric(&powered).unwrap().iter().take(k).sum()
        };
        let brute = (top_k(&positive_part(&y).unwrap()) - top_k(&negative_part(&y).unwrap())) / 8.0;
        assert_abs_diff_eq!(truncated_trace(&y, k, d).unwrap(), brute, epsilon = 1e-10);
    }

    #[test]
    fn ensembles_and_sampling() {
        assert!(WignerEnsemble::new(3, ScalarLaw::gaussian(2.0).unwrap(), ScalarLaw::rademacher()).is_err());
        assert!(WignerEnsemble::new(3, ScalarLaw::bernoulli(0.5).unwrap(), ScalarLaw::rademacher()).is_err());
        let x = wigner_sample(&WignerEnsemble::rademacher(6).unwrap(), &mut rng::master(3));
        assert!((0..6).all(|i| (0..6).all(|j| x.get(i, j).abs() == 1.0)));
    }

    #[test]
    fn second_moment() {
        let e = WignerEnsemble::rademacher(100).unwrap();
        let m = wigner_moments(&e, 2, 200, 4).unwrap();
        // (1/n²)·Σ_ij X_ij² is exactly 1 for Rademacher entries.
        assert_abs_diff_eq!(m[1].mean, 1.0, epsilon = 1e-12);
        let e = WignerEnsemble::gaussian(60).unwrap();
        let m = wigner_moments(&e, 2, 200, 5).unwrap();
        assert!(m[1].within_sigmas(1.0, 3.0));
    }

    #[test]
    fn shift_examples() {
        let r = ScalarLaw::rademacher();
        for n in [2usize, 10, 40] {
            for d in [2u32, 4, 6] {
                let c = uniform_shift_candidate(n, d, 1.3, &r).unwrap();
                assert_abs_diff_eq!(c.trace_check, 1.0, epsilon = 1e-10);
            }
            let c = uniform_shift_candidate(n, 4, 0.0, &r).unwrap();
            assert_eq!((c.y_value, c.cost, c.trace_check), (0.0, 0.0, 1.0));
        }
        for n in [3usize, 10, 40] {
            let c = uniform_shift_candidate(n, 3, 0.7, &r).unwrap();
            assert_abs_diff_eq!(c.trace_check, 1.0, epsilon = 1e-10);
        }
        assert!(matches!(uniform_shift_candidate(2, 3, 0.5, &r), Err(LabError::Infeasible(_))));
        assert!(uniform_shift_candidate(5, 4, -1.0, &r).is_err());
    }

    #[test]
    fn shift_cost_near_limit() {
        let c = uniform_shift_candidate(200, 4, 1.0, &ScalarLaw::rademacher()).unwrap();
        assert!((c.cost / 0.25 - 1.0).abs() <= 0.10);
        let costs: Vec<f64> = [50usize, 100, 200, 400]
            .iter()
            .map(|&n| uniform_shift_candidate(n, 4, 1.0, &ScalarLaw::gaussian(1.0).unwrap()).unwrap().cost)
            .collect();
        assert!(costs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tail_estimate_trivial_event() {
        let e = WignerEnsemble::rademacher(4).unwrap();
        let r = tilted_tail_estimate(&e, 4, f64::NEG_INFINITY, 1000, 1).unwrap();
        assert_eq!(r.prob_est, 1.0);
        assert_eq!(r.std_err, 0.0);
        assert!(tilted_tail_estimate(&e, 4, 3.0, MIN_TAIL_TRIALS - 1, 1).is_err());
    }

    #[test]
    fn tail_estimate_is_reproducible() {
        let e = WignerEnsemble::gaussian(6).unwrap();
        let a = tilted_tail_estimate(&e, 3, 0.8, 2000, 9).unwrap();
        let b = tilted_tail_estimate(&e, 3, 0.8, 2000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.tilt_lambda > 0.0);
    }

    #[test]
    fn fnsup_examples() {
        let mut g = rng::master(6);
        let x = wigner_sample(&WignerEnsemble::gaussian(6).unwrap(), &mut g);
        let r = fnsup_check(&x, 1, 3, 100, &mut g).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.equality_gap <= 1e-8);
        assert!(fnsup_objective(&x, &SymMatrix::zeros(6), 3).unwrap() == 0.0);
        assert!(r.t_f >= 0.0);
    }
}
