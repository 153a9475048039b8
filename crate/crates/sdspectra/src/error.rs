use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index ({i}, {j}) out of range for dimension {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("difference order r = {r} must satisfy 1 <= r < n/2 for n = {n}")]
    OrderOutOfRange { n: usize, r: usize },
    #[error("matrix dimension n = {n} outside supported range [{min}, {max}]")]
    SizeOutOfRange { n: usize, min: usize, max: usize },
    #[error("eigensolver failed to converge at index {index}")]
    EigenNoConvergence { index: usize },
    #[error("lambda = {lambda} outside the admissible interval (0, 4^r) for r = {r}")]
    LambdaOutOfRange { lambda: f64, r: usize },
    #[error("ill-conditioned roots: min pairwise distance {min_dist:e} below {limit:e}")]
    IllConditionedRoots { min_dist: f64, limit: f64 },
    #[error("coincident nodes: min pairwise distance {min_dist:e} below {limit:e}")]
    CoincidentNodes { min_dist: f64, limit: f64 },
    #[error("design matrix rank deficient: |pivot| = {pivot:e} at column {col}")]
    RankDeficient { col: usize, pivot: f64 },
    #[error("alphabet insufficient: max level {max_level} below required {required}")]
    AlphabetInsufficient { max_level: f64, required: f64 },
    #[error("input value {0} is not an element of the alphabet")]
    NotAlphabetElement(f64),
    #[error("boundary system nullspace has dimension {dim}, expected 1")]
    NullspaceDimension { dim: usize },
    #[error("eigenpair residual {residual:e} exceeds tolerance {tol:e}")]
    EigenpairResidual { residual: f64, tol: f64 },
    #[error("payload entry {value} does not fit the {bits}-bit field")]
    PayloadOverflow { value: i128, bits: u32 },
    #[error("malformed payload: {0}")]
    InvalidPayload(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
