//! Numerical laboratory for nonlinear large deviations.
//!
//! The crate collects the finite-dimensional objects that appear when one
//! bounds the upper tail of a nonlinear function of independent variables:
//! log-Laplace and Legendre transforms, exponential tilts, mean-field
//! approximations of Ising partition functions, trace functionals of Wigner
//! matrices, the cycle-count variational problem on Erdős–Rényi graphs, and
//! covering nets.  Every quantity is computed at desk scale and can be checked
//! against exact enumeration or a brute-force oracle.
//!
//! The core numerical primitives ([`linalg`], [`measures`] and the closed-form
//! rate functions) are generic over the scalar type through [`Real`]; the
//! Monte Carlo drivers and optimizers work in `f64`.  Concrete aliases for the
//! `f64` instantiation live at the crate root.

// Guards such as `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cycles;
pub mod error;
pub mod io;
pub mod ising;
pub mod linalg;
pub mod measures;
pub mod nets;
pub mod real;
pub mod rng;
pub mod stats;
pub mod wigner;

pub use error::{LabError, Result};
pub use real::Real;

/// Dense symmetric matrix over `f64`.
pub type Matrix = linalg::SymMatrix<f64>;
/// Spectral decomposition over `f64`.
pub type Spectrum = linalg::SpectralDecomposition<f64>;
/// One-dimensional law over `f64`.
pub type Law = measures::ScalarLaw<f64>;
/// Exponentially tilted law over `f64`.
pub type Tilted = measures::TiltedLaw<f64>;
/// Product law over `f64`.
pub type Product = measures::ProductLaw<f64>;
/// Single-precision dense symmetric matrix.
pub type Matrix32 = linalg::SymMatrix<f32>;
/// Single-precision one-dimensional law.
pub type Law32 = measures::ScalarLaw<f32>;
