//! One-dimensional laws with closed-form log-Laplace transforms, their
//! Legendre transforms, exponential tilts and product measures.
//!
//! `+inf` returned by [`ScalarLaw::legendre`] is a sentinel for points outside
//! the closed convex hull of the support, so variational code can treat
//! infeasible points uniformly instead of branching on errors.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{LabError, Result};
use crate::real::Real;
use crate::stats::Estimate;

/// Closed-form family of a [`ScalarLaw`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<T> {
    /// Uniform on `{-1, 1}`.
    Rademacher,
    /// `P(1) = p`, `P(0) = 1 - p`.
    Bernoulli { p: T },
    /// Uniform on `[-a, a]`.
    UniformSym { a: T },
    /// Centered normal with variance `s2`.
    Gaussian { s2: T },
}

/// A validated one-dimensional law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLaw<T> {
    family: Family<T>,
}

const NEWTON_MAX_ITERS: usize = 100;
const BISECTION_MAX_ITERS: usize = 2000;
const UNIFORM_SERIES_CUTOFF: f64 = 1e-4;

impl<T: Real> ScalarLaw<T> {
    pub fn rademacher() -> Self {
        ScalarLaw { family: Family::Rademacher }
    }

    pub fn bernoulli(p: T) -> Result<Self> {
        if !(p > T::zero() && p < T::one()) {
            return Err(LabError::arg(format!("Bernoulli requires 0 < p < 1, got {p}")));
        }
        Ok(ScalarLaw { family: Family::Bernoulli { p } })
    }

    pub fn uniform_sym(a: T) -> Result<Self> {
        if !(a > T::zero() && a.is_finite()) {
            return Err(LabError::arg(format!("UniformSym requires a > 0, got {a}")));
        }
        Ok(ScalarLaw { family: Family::UniformSym { a } })
    }

    pub fn gaussian(s2: T) -> Result<Self> {
        if !(s2 > T::zero() && s2.is_finite()) {
            return Err(LabError::arg(format!("Gaussian requires s2 > 0, got {s2}")));
        }
        Ok(ScalarLaw { family: Family::Gaussian { s2 } })
    }

    pub fn from_family(family: Family<T>) -> Result<Self> {
        match family {
            Family::Rademacher => Ok(Self::rademacher()),
            Family::Bernoulli { p } => Self::bernoulli(p),
            Family::UniformSym { a } => Self::uniform_sym(a),
            Family::Gaussian { s2 } => Self::gaussian(s2),
        }
    }

    pub fn family(&self) -> Family<T> {
        self.family
    }

    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Rademacher => "rademacher",
            Family::Bernoulli { .. } => "bernoulli",
            Family::UniformSym { .. } => "uniform",
            Family::Gaussian { .. } => "gaussian",
        }
    }

    /// Closed convex hull of the support, with infinite ends for the Gaussian.
    pub fn support(&self) -> (T, T) {
        match self.family {
            Family::Rademacher => (-T::one(), T::one()),
            Family::Bernoulli { .. } => (T::zero(), T::one()),
            Family::UniformSym { a } => (-a, a),
            Family::Gaussian { .. } => (T::neg_infinity(), T::infinity()),
        }
    }

    pub fn mean(&self) -> T {
        match self.family {
            Family::Bernoulli { p } => p,
            _ => T::zero(),
        }
    }

    pub fn variance(&self) -> T {
        match self.family {
            Family::Rademacher => T::one(),
            Family::Bernoulli { p } => p * (T::one() - p),
            Family::UniformSym { a } => a * a / T::lit(3.0),
            Family::Gaussian { s2 } => s2,
        }
    }

    /// `Λ(λ) = log E e^{λX}`.
    pub fn log_laplace(&self, lambda: T) -> Result<T> {
        if !lambda.is_finite() {
            return Err(LabError::Domain(format!("log-Laplace argument must be finite, got {lambda}")));
        }
        Ok(match self.family {
            Family::Rademacher => log_cosh(lambda),
            Family::Bernoulli { p } => {
                if lambda > T::zero() {
                    lambda + (p + (T::one() - p) * (-lambda).exp()).ln()
                } else {
                    (p * lambda.exp_m1()).ln_1p()
                }
            }
            Family::UniformSym { a } => log_sinhc(a * lambda),
            Family::Gaussian { s2 } => s2 * lambda * lambda / T::lit(2.0),
        })
    }

    /// `Λ'(λ)`, the barycenter of the tilt with parameter `λ`.
    pub fn tilt_mean(&self, lambda: T) -> T {
        match self.family {
            Family::Rademacher => lambda.tanh(),
            Family::Bernoulli { p } => logistic(lambda + logit(p)),
            Family::UniformSym { a } => a * langevin(a * lambda),
            Family::Gaussian { s2 } => s2 * lambda,
        }
    }

    /// `Λ''(λ)`, the variance of the tilt with parameter `λ`.
    pub fn tilt_variance(&self, lambda: T) -> T {
        match self.family {
            Family::Rademacher => {
                let t = lambda.tanh();
                T::one() - t * t
            }
            Family::Bernoulli { p } => {
                let q = logistic(lambda + logit(p));
                q * (T::one() - q)
            }
            Family::UniformSym { a } => a * a * langevin_derivative(a * lambda),
            Family::Gaussian { s2 } => s2,
        }
    }

    /// `Λ*(x) = sup_λ {λx − Λ(λ)}`.
    ///
    /// Support endpoints take the finite lower-semicontinuous limit when it
    /// exists (`0·log 0 = 0`); points outside the hull return `+inf`.
    pub fn legendre(&self, x: T) -> T {
        if x.is_nan() {
            return T::nan();
        }
        let one = T::one();
        let half = T::lit(0.5);
        match self.family {
            Family::Rademacher => {
                if x.abs() > one {
                    T::infinity()
                } else if x.abs() == one {
                    T::LN_2()
                } else {
                    half * ((one + x) * x.ln_1p() + (one - x) * (-x).ln_1p())
                }
            }
            Family::Bernoulli { p } => bernoulli_entropy(p, x),
            Family::Gaussian { s2 } => x * x / (T::lit(2.0) * s2),
            Family::UniformSym { a } => {
                if x.abs() >= a {
                    // No atom at the endpoints: the supremum diverges there.
                    T::infinity()
                } else if x == T::zero() {
                    T::zero()
                } else {
                    match self.tilt_parameter(x) {
                        Ok(lambda) => lambda * x - log_sinhc(a * lambda),
                        Err(_) => T::infinity(),
                    }
                }
            }
        }
    }

    /// Solves `Λ'(λ) = y` by safeguarded Newton with a bisection fallback.
    ///
    /// `y` must lie strictly inside the support's convex hull; at the boundary
    /// the tilt parameter diverges.
    pub fn tilt_parameter(&self, y: T) -> Result<T> {
        let (lo, hi) = self.support();
        if !(y > lo && y < hi) || !y.is_finite() {
            return Err(LabError::Boundary {
                mean: y.to_f64_lossy(),
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        let tol = T::tol(1e-12) * y.abs().max(T::one());
        let residual = |lambda: T| self.tilt_mean(lambda) - y;

        // Bracket the root; Λ' is increasing.
        let two = T::lit(2.0);
        let (mut left, mut right) = if residual(T::zero()) < T::zero() {
            let mut left = T::zero();
            let mut right = T::one();
            while residual(right) < T::zero() && right.is_finite() {
                left = right;
                right *= two;
            }
            (left, right)
        } else {
            let mut right = T::zero();
            let mut left = -T::one();
            while residual(left) > T::zero() && left.is_finite() {
                right = left;
                left *= two;
            }
            (left, right)
        };
        if !left.is_finite() || !right.is_finite() {
            return Err(LabError::Numerical {
                message: format!("could not bracket tilt for mean {y}"),
                residual: f64::INFINITY,
            });
        }

        let mut lambda = if residual(T::zero()).abs() <= tol { return Ok(T::zero()) } else { (left + right) * T::lit(0.5) };
        let mut best = (residual(lambda).abs(), lambda);
        for _ in 0..NEWTON_MAX_ITERS {
            let r = residual(lambda);
            if r.abs() < best.0 {
                best = (r.abs(), lambda);
            }
            if r.abs() <= tol {
                return Ok(lambda);
            }
            if r < T::zero() {
                left = lambda;
            } else {
                right = lambda;
            }
            let slope = self.tilt_variance(lambda);
            let next = lambda - r / slope;
            lambda = if slope > T::zero() && next > left && next < right {
                next
            } else {
                (left + right) * T::lit(0.5)
            };
        }
        for _ in 0..BISECTION_MAX_ITERS {
            let r = residual(lambda);
            if r.abs() < best.0 {
                best = (r.abs(), lambda);
            }
            if r.abs() <= tol {
                return Ok(lambda);
            }
            if r < T::zero() {
                left = lambda;
            } else {
                right = lambda;
            }
            let mid = (left + right) * T::lit(0.5);
            if mid <= left || mid >= right {
                break;
            }
            lambda = mid;
        }
        // Bracket collapsed to adjacent floats: the best iterate is as good as
        // the arithmetic allows.
        Ok(best.1)
    }

    /// One draw from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self.family {
            Family::Rademacher => {
                if rng.random::<bool>() {
                    T::one()
                } else {
                    -T::one()
                }
            }
            Family::Bernoulli { p } => {
                if T::lit(rng.random::<f64>()) < p {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Family::UniformSym { a } => a * T::lit(2.0 * rng.random::<f64>() - 1.0),
            Family::Gaussian { s2 } => s2.sqrt() * T::lit(rng.sample::<f64, _>(StandardNormal)),
        }
    }

    /// Moves `y` toward the mean so that it sits at most a fraction `frac` of
    /// the way to the nearest finite support endpoint.
    pub fn clamp_interior(&self, y: T, frac: T) -> T {
        let (lo, hi) = self.support();
        let m = self.mean();
        let upper = if hi.is_finite() { m + frac * (hi - m) } else { T::infinity() };
        let lower = if lo.is_finite() { m - frac * (m - lo) } else { T::neg_infinity() };
        y.max(lower).min(upper)
    }
}

/// Bernoulli relative entropy `I_p(x) = x log(x/p) + (1−x) log((1−x)/(1−p))`,
/// `+inf` outside `[0, 1]`.
pub fn bernoulli_entropy<T: Real>(p: T, x: T) -> T {
    if x.is_nan() {
        return T::nan();
    }
    if x < T::zero() || x > T::one() {
        return T::infinity();
    }
    x_log_ratio(x, p) + x_log_ratio(T::one() - x, T::one() - p)
}

/// `x log(x/q)` with `0 log 0 = 0`.
fn x_log_ratio<T: Real>(x: T, q: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x * (x / q).ln()
    }
}

fn logistic<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

fn logit<T: Real>(p: T) -> T {
    (p / (T::one() - p)).ln()
}

fn log_cosh<T: Real>(x: T) -> T {
    let ax = x.abs();
    ax + (-(ax + ax)).exp().ln_1p() - T::LN_2()
}

/// `log(sinh(u)/u)` with the `u → 0` limit 0.
fn log_sinhc<T: Real>(u: T) -> T {
    let au = u.abs();
    if au < T::lit(UNIFORM_SERIES_CUTOFF) {
        let u2 = u * u;
        // u²/6 − u⁴/180 + u⁶/2835 − u⁸/37800 + u¹⁰/467775
        u2 * (T::lit(1.0 / 6.0)
            + u2 * (T::lit(-1.0 / 180.0)
                + u2 * (T::lit(1.0 / 2835.0) + u2 * (T::lit(-1.0 / 37800.0) + u2 * T::lit(1.0 / 467775.0)))))
    } else if au < T::lit(20.0) {
        (au.sinh() / au).ln()
    } else {
        au - T::LN_2() + (-(au + au)).exp().neg().ln_1p() - au.ln()
    }
}

/// Langevin function `coth u − 1/u`.
fn langevin<T: Real>(u: T) -> T {
    if u.abs() < T::lit(1e-2) {
        let u2 = u * u;
        u * (T::lit(1.0 / 3.0)
            + u2 * (T::lit(-1.0 / 45.0) + u2 * (T::lit(2.0 / 945.0) + u2 * T::lit(-1.0 / 4725.0))))
    } else {
        T::one() / u.tanh() - T::one() / u
    }
}

/// Derivative of the Langevin function, `1/u² − 1/sinh² u`.
fn langevin_derivative<T: Real>(u: T) -> T {
    if u.abs() < T::lit(5e-2) {
        let u2 = u * u;
        T::lit(1.0 / 3.0)
            + u2 * (T::lit(-1.0 / 15.0) + u2 * (T::lit(2.0 / 189.0) + u2 * T::lit(-1.0 / 675.0)))
    } else {
        let s = u.sinh();
        T::one() / (u * u) - T::one() / (s * s)
    }
}

/// The exponential tilt `μ_y = e^{λx − Λ(λ)} dμ(x)` with barycenter `y = Λ'(λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedLaw<T> {
    base: ScalarLaw<T>,
    lambda: T,
    mean_y: T,
}

impl<T: Real> TiltedLaw<T> {
    pub fn from_lambda(base: ScalarLaw<T>, lambda: T) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(LabError::Domain(format!("tilt parameter must be finite, got {lambda}")));
        }
        Ok(TiltedLaw { base, lambda, mean_y: base.tilt_mean(lambda) })
    }

    /// The tilt whose barycenter is `y`.
    pub fn from_mean(base: ScalarLaw<T>, y: T) -> Result<Self> {
        let lambda = base.tilt_parameter(y)?;
        Ok(TiltedLaw { base, lambda, mean_y: base.tilt_mean(lambda) })
    }

    pub fn base(&self) -> &ScalarLaw<T> {
        &self.base
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn mean_y(&self) -> T {
        self.mean_y
    }

    pub fn variance(&self) -> T {
        self.base.tilt_variance(self.lambda)
    }

    /// `log dμ_y/dμ (x) = λx − Λ(λ)`.
    pub fn log_density_ratio(&self, x: T) -> T {
        self.lambda * x - self.base.log_laplace(self.lambda).unwrap_or(T::nan())
    }

    /// `λ·y − Λ(λ)`, which equals `Λ*(y)` by duality.
    pub fn dual_value(&self) -> T {
        self.log_density_ratio(self.mean_y)
    }

    /// One draw from `μ_y`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let lambda = self.lambda;
        match self.base.family {
            Family::Rademacher => {
                let p_plus = (T::one() + lambda.tanh()) * T::lit(0.5);
                if T::lit(rng.random::<f64>()) < p_plus {
                    T::one()
                } else {
                    -T::one()
                }
            }
            Family::Bernoulli { .. } => {
                if T::lit(rng.random::<f64>()) < self.mean_y {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Family::Gaussian { s2 } => s2 * lambda + s2.sqrt() * T::lit(rng.sample::<f64, _>(StandardNormal)),
            Family::UniformSym { a } => {
                let u = T::lit(rng.random::<f64>());
                let l = lambda.abs();
                if l * a < T::lit(1e-12) {
                    return a * (T::lit(2.0) * u - T::one());
                }
                // Inverse CDF of the density ∝ e^{l x} on [-a, a].
                let x = a + (u + (T::one() - u) * (-(l + l) * a).exp()).ln() / l;
                let x = x.max(-a).min(a);
                if lambda < T::zero() {
                    -x
                } else {
                    x
                }
            }
        }
    }
}

/// Product of independent one-dimensional laws; `Λ` and `Λ*` add coordinate-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductLaw<T> {
    components: Vec<ScalarLaw<T>>,
}

impl<T: Real> ProductLaw<T> {
    pub fn new(components: Vec<ScalarLaw<T>>) -> Self {
        ProductLaw { components }
    }

    pub fn iid(law: ScalarLaw<T>, n: usize) -> Self {
        ProductLaw { components: vec![law; n] }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[ScalarLaw<T>] {
        &self.components
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(LabError::arg(format!("dimension mismatch: law has {} coordinates, got {got}", self.len())));
        }
        Ok(())
    }

    pub fn log_laplace(&self, lambda: &[T]) -> Result<T> {
        self.check_dim(lambda.len())?;
        let mut total = T::zero();
        for (law, &l) in self.components.iter().zip(lambda) {
            total += law.log_laplace(l)?;
        }
        Ok(total)
    }

    /// `Σ_i Λ*_i(x_i)`, `+inf` as soon as one coordinate is infeasible.
    pub fn legendre(&self, x: &[T]) -> Result<T> {
        self.check_dim(x.len())?;
        let mut total = T::zero();
        for (law, &xi) in self.components.iter().zip(x) {
            let v = law.legendre(xi);
            if v == T::infinity() {
                return Ok(T::infinity());
            }
            total += v;
        }
        Ok(total)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.components.iter().map(|law| law.sample(rng)).collect()
    }
}

/// Monte Carlo estimate of `E exp(α Λ*(X))` for `X ~ law`, whose exact value
/// is at most `2/(1−α)`.
pub fn tightness_moment<T: Real, R: Rng + ?Sized>(law: &ScalarLaw<T>, alpha: f64, draws: usize, rng: &mut R) -> Estimate {
    let values: Vec<f64> = (0..draws)
        .map(|_| {
            let x = law.sample(rng);
            (alpha * law.legendre(x).to_f64_lossy()).exp()
        })
        .collect();
    Estimate::from_samples(&values)
}
