use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("offset epoch {epoch} lies outside the open observation span ({first}, {last})")]
    DegenerateOffset { epoch: f64, first: f64, last: f64 },

    #[error("parameter outside admissible region: {0}")]
    Domain(String),

    #[error("matrix is not positive definite (leading minor of order {minor} failed)")]
    NotPositiveDefinite { minor: usize },

    #[error("series of length {n} is too short for {levels} wavelet levels (at most {max_levels} are feasible)")]
    InsufficientLength { n: usize, levels: usize, max_levels: usize },

    #[error("wavelet scale {scale} has no coefficients")]
    EmptyScale { scale: usize },

    #[error("wavelet variance at scale {scale} is zero; diagonal weighting is undefined")]
    DegenerateWeight { scale: usize },

    #[error("model with {params} parameters is not identified by {levels} wavelet variances")]
    UnderIdentified { params: usize, levels: usize },

    #[error("iteration count {0} is not supported (use 1 or 2)")]
    UnsupportedIterations(usize),

    #[error("sample size {n} exceeds the dense likelihood cap of {cap}; the likelihood oracle is meant for validation runs")]
    LikelihoodCap { n: usize, cap: usize },

    #[error("sample size {n} exceeds the simulation cap of {cap}; use a shorter span")]
    SimulationCap { n: usize, cap: usize },

    #[error("{failed} of {total} replications failed (more than 5%)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Parse(#[from] crate::io::ParseError),
}
