use thiserror::Error;

/// Errors raised by the geometry kernels and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("elements belong to different Lie algebras ({left} vs {right})")]
    AlgebraMismatch { left: String, right: String },

    #[error("rank decision is ambiguous: singular value {sigma:.3e} lies inside the guard band")]
    DegenerateRank { sigma: f64 },

    #[error("basis is not orthonormal (Gram defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("grid mismatch: {left} vs {right} subintervals")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid size {0}: must be a power of two and at least 2")]
    InvalidGrid(usize),

    #[error("integration step too large (increment norm {step:.3e}); refine the grid")]
    RefineGrid { step: f64 },

    #[error("matrix logarithm failed: {0}")]
    Logarithm(String),

    #[error("matrix is not in the group (membership defect {defect:.3e})")]
    NotInGroup { defect: f64 },

    #[error("matrix does not lie in the Lie algebra (residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },

    #[error("vector is not normal (defect {defect:.3e})")]
    NotNormal { defect: f64 },

    #[error("vector is not tangent (defect {defect:.3e})")]
    NotTangent { defect: f64 },

    #[error("operator is not symmetric (defect {defect:.3e})")]
    Asymmetric { defect: f64 },

    #[error("not enough grid points: n = {n} must be at least 4 * modes = {required}")]
    TooFewGridPoints { n: usize, required: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("refusing construction: {0}")]
    Hypothesis(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}
