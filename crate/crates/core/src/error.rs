use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {0} must be even and at least 2")]
    OddDegree(u32),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polynomial shapes differ: ({n0}, {d0}) vs ({n1}, {d1})")]
    ShapeMismatch {
        n0: usize,
        d0: u32,
        n1: usize,
        d1: u32,
    },

    #[error("invalid term {alpha:?}: {reason}")]
    InvalidTerm { alpha: Vec<u32>, reason: String },

    #[error("integral diverges along direction {witness:?}")]
    Divergent { witness: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate point set: {0}")]
    DegeneratePoints(String),

    #[error("Newton iteration failed: {reason}")]
    NewtonFailure { reason: String, trace: Vec<String> },

    #[error("contact certification failed: relative residual {residual:.3e}")]
    CertificationFailed { residual: f64 },

    #[error("function is not admissible: {0}")]
    NotAdmissible(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
