use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: matrix is not positive definite (Cholesky factorization failed)")]
    NotPositiveDefinite { what: String },

    #[error("{what}: matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { what: String, asymmetry: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: String,
        found: String,
    },

    #[error("{what}: embedding is not of full column rank (smallest/largest singular value {ratio:e})")]
    RankDeficientEmbedding { what: String, ratio: f64 },

    #[error("discrete inf-sup condition fails: alpha_hat = {alpha_hat:e} <= threshold {threshold:e}")]
    InfSupFailure { alpha_hat: f64, threshold: f64 },

    #[error("dimension {dim} exceeds the brute-force limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error(
        "surjectivity criteria disagree: rank test says {rank_says}, beta test says {beta_says} \
         (beta = {beta:e}); the search resolution is probably too low"
    )]
    InconsistentCriteria {
        rank_says: bool,
        beta_says: bool,
        beta: f64,
    },

    #[error("operator is not surjective (rank {rank} < {dim})")]
    NotSurjective { rank: usize, dim: usize },

    #[error("operator is not bijective: {reason}")]
    NotBijective { reason: String },

    #[error("iterative solver stalled: {reason} (residual {residual:e})")]
    SolverStall { reason: String, residual: f64 },

    #[error("not a direct-sum decomposition: {reason}")]
    NotADecomposition { reason: String },

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema version mismatch: expected {expected:?}, found {found:?}")]
    SchemaVersionMismatch { expected: String, found: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
