use thiserror::Error;

/// Errors produced by the reconstruction and geometry routines.
#[derive(Debug, Error)]
pub enum GplsError {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The sample is unisolvent for the chosen space, so no polynomial in it
    /// vanishes on all points.
    #[error("no variety: the {points} points are unisolvent for a space of dimension {dim}; raise the degree or add points")]
    NoVariety { points: usize, dim: usize },

    /// The vanishing ideal restricted to the space has more than one generator.
    #[error("ambiguous variety: corank {corank} (expected 1); lower the degree, switch the lp-degree, lower the rank tolerance, or fit with --mode lagrange-sum")]
    Ambiguous { corank: usize },

    #[error("projection did not converge after {iterations} iterations (residual {residual:e}) at {point:?}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        point: Vec<f64>,
    },

    #[error("degenerate gradient (|grad q| = {grad_norm:e}) at {point:?}")]
    Degenerate { grad_norm: f64, point: Vec<f64> },

    #[error("degenerate fit: vanishing gradient at input point {index}")]
    DegenerateFit { index: usize },

    #[error("zero-length normals at indices {0:?}")]
    ZeroNormals(Vec<usize>),

    #[error("sampling failed: only {got} of {wanted} draws converged after {attempts} attempts")]
    Sampling {
        wanted: usize,
        got: usize,
        attempts: usize,
    },

    #[error("no curvature oracle for surface '{0}'")]
    UnsupportedOracle(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GplsError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GplsError::Domain(msg.into())
    }

    /// True for failures of the numerics (non-convergence, corank mismatch,
    /// degeneracy) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GplsError::NoVariety { .. }
                | GplsError::Ambiguous { .. }
                | GplsError::NonConvergence { .. }
                | GplsError::Degenerate { .. }
                | GplsError::DegenerateFit { .. }
                | GplsError::Sampling { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, GplsError>;
