//! Dense real symmetric linear algebra.
//!
//! [`SymMatrix`] stores the upper triangle only, so symmetry holds by
//! construction.  Eigendecompositions use cyclic Jacobi rotations, which keep
//! the eigenvector basis orthogonal to working precision at the sizes used
//! here (n up to a few hundred).

use crate::error::{LabError, Result};
use crate::real::Real;

/// Maximum number of full Jacobi sweeps.
pub const MAX_SWEEPS: usize = 50;

/// Real symmetric `n × n` matrix in packed upper-triangular storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

/// Position of `(i, j)`, `i <= j`, in packed row-major upper-triangular storage.
#[inline]
pub(crate) fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![T::zero(); n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                data.push(f(i, j));
            }
        }
        SymMatrix { n, data }
    }

    /// Builds a matrix from full rows, rejecting non-square or asymmetric input.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LabError::arg("matrix rows must all have length n"));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, other) in rows.iter().enumerate().skip(i + 1) {
                let (a, b) = (row[j], other[i]);
                if a != b && (a - b).abs() > T::tol(1e-12) * (T::one() + a.abs().max(b.abs())) {
                    return Err(LabError::arg(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// Builds a matrix from a row-major `n × n` buffer, using its upper triangle.
    pub fn from_dense_upper(n: usize, dense: &[T]) -> Self {
        assert_eq!(dense.len(), n * n);
        Self::from_fn(n, |i, j| dense[i * n + j])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.offset(i, j);
        self.data[k] = v;
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        packed_index(self.n, i, j)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == T::zero())
    }

    /// Upper-triangle entries `(i, j, value)` with `i < j`.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect() }
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                s += if i == j { v * v } else { (v * v) * T::lit(2.0) };
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    /// `tr(A B)` for symmetric `A`, `B`, which is the Frobenius inner product.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        let mut s = T::zero();
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j) * other.get(i, j);
                s += if i == j { v } else { v + v };
            }
        }
        s
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            y[i] += self.get(i, i) * x[i];
            for j in (i + 1)..self.n {
                let a = self.get(i, j);
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        y
    }

    /// `⟨x, A x⟩`.
    pub fn quadratic_form(&self, x: &[T]) -> T {
        self.matvec(x).iter().zip(x).map(|(&a, &b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.n;
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DenseMatrix { n, data }
    }

    /// Rank-one update `self += c · v vᵀ`.
    pub fn add_outer(&mut self, c: T, v: &[T]) {
        assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let k = self.offset(i, j);
                self.data[k] += c * v[i] * v[j];
            }
        }
    }
}

/// Square matrix in row-major storage, used for products and powers.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        DenseMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![T::zero(); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == T::zero() {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        DenseMatrix { n, data: out }
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                s += self.data[i * n + j] * other.data[j * n + i];
            }
        }
        s
    }

    /// `self^m` by repeated multiplication, `m >= 1`.
    pub fn power(&self, m: usize) -> Self {
        assert!(m >= 1);
        let mut acc = self.clone();
        for _ in 1..m {
            acc = acc.matmul(self);
        }
        acc
    }

    /// Symmetrized copy `(A + Aᵀ)/2`; exact for powers of symmetric matrices
    /// up to rounding.
    pub fn to_sym(&self) -> SymMatrix<T> {
        let half = T::lit(0.5);
        SymMatrix::from_fn(self.n, |i, j| half * (self.get(i, j) + self.get(j, i)))
    }
}

/// Eigenvalues in non-increasing order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition<T> {
    /// Sorted non-increasing.
    pub values: Vec<T>,
    /// `vectors[i]` is the unit eigenvector for `values[i]`.
    pub vectors: Vec<Vec<T>>,
    /// Number of Jacobi sweeps used.
    pub sweeps: usize,
}

impl<T: Real> SpectralDecomposition<T> {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Functional calculus `Σ_i f(λ_i) u_i u_iᵀ`.
    pub fn apply(&self, f: impl Fn(T) -> T) -> SymMatrix<T> {
        let n = self.n();
        let mut out = SymMatrix::zeros(n);
        for (&lambda, u) in self.values.iter().zip(&self.vectors) {
            let c = f(lambda);
            if c != T::zero() {
                out.add_outer(c, u);
            }
        }
        out
    }

    pub fn reconstruct(&self) -> SymMatrix<T> {
        self.apply(|x| x)
    }

    /// `max |QᵀQ − I|` over entries.
    pub fn orthogonality_defect(&self) -> T {
        let n = self.n();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let dot: T = self.vectors[i].iter().zip(&self.vectors[j]).map(|(&a, &b)| a * b).sum();
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until the largest off-diagonal entry is at most `1e-12·‖Y‖_F`
/// (or a few ulps for lower precision types).
pub fn eigen_symmetric<T: Real>(y: &SymMatrix<T>) -> Result<SpectralDecomposition<T>> {
    jacobi(y, true)
}

/// Eigenvalues only, sorted non-increasing.
pub fn eigenvalues_symmetric<T: Real>(y: &SymMatrix<T>) -> Result<Vec<T>> {
    jacobi(y, false).map(|d| d.values)
}

fn jacobi<T: Real>(y: &SymMatrix<T>, want_vectors: bool) -> Result<SpectralDecomposition<T>> {
    let n = y.n();
    if n == 0 {
        return Err(LabError::arg("eigendecomposition needs n >= 1"));
    }
    let mut a = y.to_dense().data;
    // Rows of `vt` are the eigenvectors being accumulated.
    let mut vt = if want_vectors { DenseMatrix::<T>::identity(n).data } else { Vec::new() };
    let threshold = T::tol(1e-12) * y.frobenius_norm();
    let max_off = |a: &[T]| {
        let mut m = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                m = m.max(a[p * n + q].abs());
            }
        }
        m
    };

    let mut sweeps = 0;
    let mut off = max_off(&a);
    while off > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(LabError::Numerical {
                message: format!("Jacobi did not converge in {MAX_SWEEPS} sweeps"),
                residual: off.to_f64_lossy(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= threshold * T::lit(1e-3) {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (apq + apq);
                let t = if theta.abs() > T::lit(1e150).min(T::max_value().sqrt()) {
                    T::one() / (theta + theta)
                } else {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // Rows p and q, mirrored into columns.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    let np = c * akp - s * akq;
                    let nq = s * akp + c * akq;
                    a[p * n + k] = np;
                    a[k * n + p] = np;
                    a[q * n + k] = nq;
                    a[k * n + q] = nq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                if want_vectors {
                    let (head, tail) = vt.split_at_mut(q * n);
                    let vp = &mut head[p * n..(p + 1) * n];
                    let vq = &mut tail[..n];
                    for (x, z) in vp.iter_mut().zip(vq.iter_mut()) {
                        let (xp, xq) = (*x, *z);
                        *x = c * xp - s * xq;
                        *z = s * xp + c * xq;
                    }
                }
            }
        }
        off = max_off(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: ties keep the Jacobi output order.
    order.sort_by(|&i, &j| a[j * n + j].partial_cmp(&a[i * n + i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = if want_vectors { order.iter().map(|&i| vt[i * n..(i + 1) * n].to_vec()).collect() } else { Vec::new() };
    Ok(SpectralDecomposition { values, vectors, sweeps })
}

/// `tr(Y^d) = Σ λ_i^d` from the spectrum.
pub fn trace_power<T: Real>(y: &SymMatrix<T>, d: u32) -> Result<T> {
    if d == 0 {
        return Err(LabError::arg("trace power needs d >= 1"));
    }
    let values = eigenvalues_symmetric(y)?;
    Ok(values.iter().map(|&l| l.powi(d as i32)).sum())
}

/// `tr(Y^d)` by repeated multiplication.
pub fn trace_power_by_multiplication<T: Real>(y: &SymMatrix<T>, d: u32) -> T {
    assert!(d >= 1);
    let dense = y.to_dense();
    if d == 1 {
        return dense.trace();
    }
    let half = (d / 2) as usize;
    let lo = dense.power(half);
    if d.is_multiple_of(2) {
        lo.trace_product(&lo)
    } else {
        lo.trace_product(&lo.matmul(&dense))
    }
}

/// Spectral projection onto the nonnegative eigenvalues, `Y_+`.
pub fn positive_part<T: Real>(y: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    Ok(eigen_symmetric(y)?.apply(|l| l.max(T::zero())))
}

/// `Y_− = (−Y)_+`, so that `Y = Y_+ − Y_−` with both parts positive semidefinite.
pub fn negative_part<T: Real>(y: &SymMatrix<T>) -> Result<SymMatrix<T>> {
    Ok(eigen_symmetric(y)?.apply(|l| (-l).max(T::zero())))
}

/// Operator norm `max |λ_i|`.
pub fn operator_norm<T: Real>(y: &SymMatrix<T>) -> Result<T> {
    let values = eigenvalues_symmetric(y)?;
    Ok(values.iter().fold(T::zero(), |m, &x| m.max(x.abs())))
}
