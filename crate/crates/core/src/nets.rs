//! ε-nets of intervals, spheres and low-rank matrix balls, with sampled
//! coverage checks and a Gaussian mean-width estimator.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::linalg::{eigen_symmetric, SymMatrix};
use crate::rng::{self, Stream};
use crate::stats::Estimate;

/// Number of fresh samples used to check a net.
pub const VERIFICATION_SAMPLES: usize = 10_000;

/// Largest sphere-net pool or net size built in memory.
const MAX_POOL: usize = 4_000_000;

/// Result of a sampled coverage check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    pub samples: usize,
    /// Largest distance from a sample to its nearest net point.
    pub worst_gap: f64,
}

impl Coverage {
    pub fn holds(&self, mesh: f64) -> bool {
        self.worst_gap <= mesh
    }
}

/// A finite net together with its size, the size bound it should respect,
/// and the outcome of its coverage check.
#[derive(Debug, Clone, PartialEq)]
pub struct NetResult<P> {
    pub points: Vec<P>,
    pub mesh: f64,
    pub target_desc: String,
    pub cardinality: usize,
    pub log_cardinality: f64,
    /// Upper bound on the log-cardinality, when one applies.
    pub bound: Option<f64>,
    pub coverage: Option<Coverage>,
}

/// Uniform grid covering `[a, b]` with spacing at most `eps`.
pub fn net_interval(a: f64, b: f64, eps: f64) -> Result<NetResult<f64>> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(LabError::arg(format!("net mesh must be positive, got {eps}")));
    }
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(LabError::arg(format!("net interval needs a <= b, got [{a}, {b}]")));
    }
    let points = if a == b {
        vec![a]
    } else {
        let m = ((b - a) / eps).ceil() as usize + 1;
        let step = (b - a) / (m - 1) as f64;
        (0..m).map(|i| if i + 1 == m { b } else { a + i as f64 * step }).collect()
    };
    let cardinality = points.len();
    Ok(NetResult {
        points,
        mesh: eps,
        target_desc: format!("interval [{a}, {b}]"),
        cardinality,
        log_cardinality: (cardinality as f64).ln(),
        bound: None,
        coverage: None,
    })
}

/// Nearest grid value to `x` in a sorted interval net.
pub fn nearest_in_interval(points: &[f64], x: f64) -> f64 {
    match points.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => points[i],
        Err(0) => points[0],
        Err(i) if i == points.len() => points[i - 1],
        Err(i) => {
            if x - points[i - 1] <= points[i] - x {
                points[i - 1]
            } else {
                points[i]
            }
        }
    }
}

/// Uniform point on the unit sphere in `R^n`.
pub fn sphere_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Hash grid over points of `[-1, 1]^n` for radius queries.
struct PointIndex {
    cell: f64,
    side: u64,
    margin: u64,
    cells: HashMap<u64, Vec<u32>>,
    points: Vec<Vec<f64>>,
    /// Key differences of all cells within `margin` cells in each coordinate.
    deltas: Vec<i64>,
}

impl PointIndex {
    /// Index whose queries scan `reach` cells in each direction.
    fn new(dim: usize, cell: f64, reach: u64) -> Option<Self> {
        // Spare cells on each side so scanned neighbors never leave the grid.
        let side = (2.0 / cell).ceil() as u64 + 1 + 2 * reach;
        let mut total: u64 = 1;
        for _ in 0..dim {
            total = total.checked_mul(side)?;
        }
        i64::try_from(total).ok()?;
        let r = reach as i64;
        let mut deltas = vec![0i64];
        let mut stride = 1i64;
        for _ in 0..dim {
            deltas = deltas.into_iter().flat_map(|d| (-r..=r).map(move |o| d + o * stride)).collect();
            stride *= side as i64;
        }
        Some(PointIndex { cell, side, margin: reach, cells: HashMap::new(), points: Vec::new(), deltas })
    }

    fn key(&self, x: &[f64]) -> u64 {
        x.iter().rev().fold(0u64, |k, &v| {
            let c = ((v.clamp(-1.0, 1.0) + 1.0) / self.cell).floor() as u64 + self.margin;
            k * self.side + c
        })
    }

    fn insert(&mut self, x: Vec<f64>) {
        let key = self.key(&x);
        self.cells.entry(key).or_default().push(self.points.len() as u32);
        self.points.push(x);
    }

    /// Nearest indexed point within `radius`, if any.  Requires
    /// `radius <= reach * cell`.
    fn nearest_within(&self, x: &[f64], radius: f64) -> Option<(usize, f64)> {
        let base = self.key(x) as i64;
        let mut best: Option<(usize, f64)> = None;
        for &d in &self.deltas {
            if let Some(ids) = self.cells.get(&((base + d) as u64)) {
                for &id in ids {
                    let dd = dist(x, &self.points[id as usize]);
                    if dd <= radius && best.is_none_or(|(bi, bd)| dd < bd || (dd == bd && (id as usize) < bi)) {
                        best = Some((id as usize, dd));
                    }
                }
            }
        }
        best
    }
}

/// Nearest point of `points` to `x`, by exhaustive search.
fn nearest_brute(points: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    points.iter().enumerate().map(|(i, p)| (i, dist(p, x))).fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
}

/// Nearest-point search over a fixed sphere net.
pub struct SphereLocator {
    index: Option<PointIndex>,
    radius: f64,
    points: Vec<Vec<f64>>,
}

impl SphereLocator {
    /// Indexed search for queries whose nearest point lies within `radius`;
    /// farther queries fall back to exhaustive search.
    pub fn new(points: &[Vec<f64>], radius: f64) -> Self {
        let dim = points.first().map_or(1, Vec::len);
        let reach = if radius >= 1e-3 { 1 } else { (radius / 1e-3).ceil() as u64 };
        let cell = radius.max(1e-3);
        let mut index = PointIndex::new(dim, cell, reach).filter(|ix| ix.deltas.len() <= points.len());
        if let Some(ix) = index.as_mut() {
            for p in points {
                ix.insert(p.clone());
            }
        }
        SphereLocator { index, radius, points: points.to_vec() }
    }

    /// Index of and distance to the nearest point.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        if let Some(ix) = &self.index {
            if let Some(hit) = ix.nearest_within(x, self.radius) {
                return hit;
            }
        }
        nearest_brute(&self.points, x)
    }
}

/// Covering radius of the projected cube-surface grid with `g` points per edge.
fn cube_pool_radius(n: usize, g: usize) -> f64 {
    let h = 2.0 / (g - 1) as f64;
    h * ((n - 1) as f64).sqrt() / 2.0
}

/// Grid points on the faces of `[-1, 1]^n`, radially projected to the sphere.
fn cube_pool(n: usize, g: usize) -> Vec<Vec<f64>> {
    let h = 2.0 / (g - 1) as f64;
    let per_face = g.pow((n - 1) as u32);
    let mut out = Vec::with_capacity(2 * n * per_face);
    for face in 0..n {
        for sign in [1.0, -1.0] {
            for idx in 0..per_face {
                let mut rest = idx;
                let mut v = Vec::with_capacity(n);
                for j in 0..n {
                    if j == face {
                        v.push(sign);
                    } else {
                        v.push(-1.0 + (rest % g) as f64 * h);
                        rest /= g;
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                out.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
    }
    out
}

/// Greedy `sep`-separated subset of `pool`, scanning in order.
fn greedy_separated(n: usize, pool: impl IntoIterator<Item = Vec<f64>>, sep: f64) -> Result<Vec<Vec<f64>>> {
    let mut index = PointIndex::new(n, sep, 1).ok_or_else(|| LabError::Resource(format!("sphere net mesh {sep} too fine for n = {n}")))?;
    for p in pool {
        if index.nearest_within(&p, sep).is_none() {
            index.insert(p);
            if index.points.len() > MAX_POOL {
                return Err(LabError::Resource("sphere net exceeds the in-memory size limit".into()));
            }
        }
    }
    Ok(index.points)
}

fn poles(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
    }
    out
}

/// Largest nearest-point distance over `samples` fresh uniform sphere points.
fn sphere_coverage(points: &[Vec<f64>], mesh: f64, samples: usize, seed: u64) -> Coverage {
    let n = points[0].len();
    let locator = SphereLocator::new(points, mesh);
    let worst_gap = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = sphere_point(n, &mut rng::stream(seed, i as u64));
            locator.nearest(&x).1
        })
        .reduce(|| 0.0, f64::max);
    Coverage { samples, worst_gap }
}

/// ε-net of the unit sphere `S^{n-1}`, `2 <= n <= 8`.
///
/// Points are chosen greedily from the poles followed by a pool whose own
/// covering radius `ρ` is known, keeping a pool point only when it is at
/// least `eps − ρ` from every kept point.  The kept set is then an ε-net and
/// is `(eps − ρ)`-separated, so its size is at most `(1 + 2/(eps − ρ))^n`.
/// The pool is a projected grid on the cube surface when that is small
/// enough, and otherwise a large random sample with `ρ` estimated; either
/// way coverage is checked on [`VERIFICATION_SAMPLES`] fresh points.
pub fn net_sphere(n: usize, eps: f64, rng: &mut Stream) -> Result<NetResult<Vec<f64>>> {
    if !(2..=8).contains(&n) {
        return Err(LabError::arg(format!("sphere nets need 2 <= n <= 8, got {n}")));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(LabError::arg(format!("net mesh must be positive, got {eps}")));
    }
    let verify_seed: u64 = rng.random();
    let bound = Some(n as f64 * (12.0 / eps).ln());
    let target_desc = format!("unit sphere in R^{n}");

    if eps >= 2.0 {
        let mut p = vec![0.0; n];
        p[0] = 1.0;
        let points = vec![p];
        let coverage = sphere_coverage(&points, eps, VERIFICATION_SAMPLES, verify_seed);
        return Ok(NetResult { points, mesh: eps, target_desc, cardinality: 1, log_cardinality: 0.0, bound, coverage: Some(coverage) });
    }

    // Grid spacing giving pool radius eps/4.
    let g = (2.0 * 2.0 * ((n - 1) as f64).sqrt() / eps).ceil() as usize + 1;
    let pool_size = (2 * n) as f64 * (g as f64).powi(n as i32 - 1);
    let points = if pool_size <= MAX_POOL as f64 {
        let rho = cube_pool_radius(n, g);
        greedy_separated(n, poles(n).into_iter().chain(cube_pool(n, g)), eps - rho)?
    } else {
        let sep = eps / 2.0;
        let pool_seed: u64 = rng.random();
        let pool = (0..MAX_POOL).map(move |i| sphere_point(n, &mut rng::stream(pool_seed, i as u64)));
        greedy_separated(n, poles(n).into_iter().chain(pool), sep)?
    };

    let coverage = sphere_coverage(&points, eps, VERIFICATION_SAMPLES, verify_seed);
    if !coverage.holds(eps) {
        return Err(LabError::NetConstruction { worst_gap: coverage.worst_gap, mesh: eps });
    }
    let cardinality = points.len();
    Ok(NetResult {
        points,
        mesh: eps,
        target_desc,
        cardinality,
        log_cardinality: (cardinality as f64).ln(),
        bound,
        coverage: Some(coverage),
    })
}

/// Net of `{Y symmetric : rank Y <= k, ||Y|| <= 1}` of the form
/// `Σ_{i≤k} μ_i v_i v_iᵀ` with `μ_i` from an interval net and `v_i` from a
/// sphere net.  The net is kept in factored form; its members are all
/// `k`-tuples of (level, direction) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankNet {
    pub n: usize,
    pub rank: usize,
    pub mesh: f64,
    pub levels: NetResult<f64>,
    pub directions: NetResult<Vec<f64>>,
    pub log_cardinality: f64,
    /// `2nk log(12k/ε)`.
    pub bound: f64,
    /// Frobenius-distance coverage check on random members of the target set.
    pub coverage: Option<Coverage>,
}

/// Cap on the number of matrices [`LowRankNet::enumerate`] will build.
pub const MAX_ENUMERATED: usize = 1_000_000;

impl LowRankNet {
    /// Number of net members, `(|levels|·|directions|)^k`, when it fits in `u128`.
    pub fn cardinality(&self) -> Option<u128> {
        let per = (self.levels.cardinality as u128).checked_mul(self.directions.cardinality as u128)?;
        per.checked_pow(self.rank as u32)
    }

    /// The member built from `(level, direction)` index pairs.
    pub fn member(&self, choice: &[(usize, usize)]) -> SymMatrix<f64> {
        let mut y = SymMatrix::zeros(self.n);
        for &(l, d) in choice {
            y.add_outer(self.levels.points[l], &self.directions.points[d]);
        }
        y
    }

    /// Every member, when there are at most [`MAX_ENUMERATED`].
    pub fn enumerate(&self) -> Result<Vec<SymMatrix<f64>>> {
        let total = self.cardinality().filter(|&c| c <= MAX_ENUMERATED as u128).ok_or_else(|| {
            LabError::Resource(format!("low-rank net has e^{:.1} members; refusing to enumerate", self.log_cardinality))
        })? as usize;
        let per = self.levels.cardinality * self.directions.cardinality;
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut choice = Vec::with_capacity(self.rank);
            for _ in 0..self.rank {
                let pair = idx % per;
                idx /= per;
                choice.push((pair / self.directions.cardinality, pair % self.directions.cardinality));
            }
            out.push(self.member(&choice));
        }
        Ok(out)
    }

    /// Nearest member in factored form, using the top-`k` eigenpairs of `y`.
    /// Returns the member and its Frobenius distance to `y`.
    pub fn approximate(&self, y: &SymMatrix<f64>, locator: &SphereLocator) -> Result<(SymMatrix<f64>, f64)> {
        let e = eigen_symmetric(y)?;
        let mut order: Vec<usize> = (0..e.n()).collect();
        order.sort_by(|&a, &b| e.values[b].abs().total_cmp(&e.values[a].abs()));
        let mut z = SymMatrix::zeros(self.n);
        for &i in order.iter().take(self.rank) {
            let mu = nearest_in_interval(&self.levels.points, e.values[i]);
            let u = &e.vectors[i];
            let neg: Vec<f64> = u.iter().map(|x| -x).collect();
            let (a, da) = locator.nearest(u);
            let (b, db) = locator.nearest(&neg);
            let v = if da <= db { &self.directions.points[a] } else { &self.directions.points[b] };
            z.add_outer(mu, v);
        }
        let gap = z.sub(y).frobenius_norm();
        Ok((z, gap))
    }
}

/// Random member of the rank-`k` unit operator-norm ball: orthonormal
/// directions with levels uniform in `[-1, 1]`, one level pushed to `±1`
/// half of the time so the boundary is exercised.
pub fn sample_low_rank<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> SymMatrix<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k.min(n) {
        let mut v = sphere_point(n, rng);
        for b in &basis {
            let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut levels: Vec<f64> = (0..basis.len()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    if rng.random::<bool>() {
        levels[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let mut y = SymMatrix::zeros(n);
    for (mu, v) in levels.iter().zip(&basis) {
        y.add_outer(*mu, v);
    }
    y
}

/// Low-rank net with level mesh `eps/(2k)` and direction mesh `eps/(4k)`,
/// checked on [`VERIFICATION_SAMPLES`] random targets in Frobenius norm.
pub fn net_lowrank(n: usize, k: usize, eps: f64, rng: &mut Stream) -> Result<LowRankNet> {
    if n > 6 || k > 2 {
        return Err(LabError::Resource(format!("low-rank nets are limited to n <= 6 and k <= 2, got n = {n}, k = {k}")));
    }
    if k == 0 || n < 2 {
        return Err(LabError::arg("low-rank nets need n >= 2 and k >= 1"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::arg(format!("low-rank net mesh must lie in (0, 1), got {eps}")));
    }
    let kf = k as f64;
    let levels = net_interval(-1.0, 1.0, eps / (2.0 * kf))?;
    let directions = net_sphere(n, eps / (4.0 * kf), rng)?;
    let log_cardinality = kf * (levels.log_cardinality + directions.log_cardinality);
    let bound = 2.0 * n as f64 * kf * (12.0 * kf / eps).ln();
    let mut net = LowRankNet { n, rank: k, mesh: eps, levels, directions, log_cardinality, bound, coverage: None };

    let seed: u64 = rng.random();
    let locator = SphereLocator::new(&net.directions.points, net.directions.mesh);
    let gaps: Result<Vec<f64>> = (0..VERIFICATION_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let y = sample_low_rank(n, k, &mut rng::stream(seed, i as u64));
            net.approximate(&y, &locator).map(|(_, gap)| gap)
        })
        .collect();
    let worst_gap = gaps?.into_iter().fold(0.0, f64::max);
    net.coverage = Some(Coverage { samples: VERIFICATION_SAMPLES, worst_gap });
    if worst_gap > eps {
        return Err(LabError::NetConstruction { worst_gap, mesh: eps });
    }
    Ok(net)
}

/// Monte Carlo estimate of `E sup_{x∈[-1,1]^n} ⟨Ax, Γ⟩ = E ||AΓ||_1` for a
/// standard Gaussian vector `Γ`.
pub fn gaussian_mean_width(a: &SymMatrix<f64>, trials: usize, rng: &mut Stream) -> Result<Estimate> {
    if trials < 100 {
        return Err(LabError::arg(format!("mean width needs at least 100 trials, got {trials}")));
    }
    let n = a.n();
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            a.matvec(&g).iter().map(|v| v.abs()).sum()
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}
