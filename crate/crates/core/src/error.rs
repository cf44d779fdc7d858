use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum BiuniError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("matrix is not unitary: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("entry {index} is not unimodular (|z| = {modulus})")]
    NotUnimodular { index: usize, modulus: f64 },

    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    #[error("SVD did not converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    SvdNoConvergence { sweeps: usize, off: f64 },

    #[error(
        "vector is not near-biunimodular: residual n - |Av|_1 = {residual:.3e} (limit {limit:.3e})"
    )]
    NotNearBiunimodular { residual: f64, limit: f64 },

    #[error("analysis failed: extracted block has unitarity residual {residual:.3e}")]
    AnalysisFailed { residual: f64 },

    #[error("certificate bound violated: {0}")]
    CertificateViolation(String),

    #[error("root finding failed: {0}")]
    RootFind(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("tolerance error: {0}")]
    Tolerance(String),

    #[error("search failed to converge: {0}")]
    SearchFailed(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BiuniError>;
