use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Tilt requested at or beyond the boundary of the support's convex hull.
    #[error("boundary error: mean {mean} is not interior to [{lo}, {hi}]")]
    Boundary { mean: f64, lo: f64, hi: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Problem too large for exact enumeration or explicit construction.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },
    #[error("no start converged: {0}")]
    Convergence(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("net construction failed: worst gap {worst_gap} exceeds mesh {mesh}")]
    NetConstruction { worst_gap: f64, mesh: f64 },
    #[error("value out of range: {0}")]
    Range(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl LabError {
    pub fn arg(msg: impl Into<String>) -> Self {
        LabError::Argument(msg.into())
    }

    /// True for failures of a computation rather than of its inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::Numerical { .. }
                | LabError::Convergence(_)
                | LabError::Certification(_)
                | LabError::Infeasible(_)
                | LabError::NetConstruction { .. }
        )
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
