use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty functional tuple")]
    EmptyTuple,

    #[error("operation requires a complex space")]
    RealSpaceInput,

    #[error("operation requires a real space")]
    ComplexSpaceInput,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("term budget exhausted: {terms} terms exceed budget {budget}")]
    BudgetExhausted { terms: usize, budget: usize },

    #[error("closure depth {depth} exceeds cap {cap}")]
    DepthCapExceeded { depth: usize, cap: usize },

    #[error("norm is not smooth: {0}")]
    NotSmooth(String),

    #[error("eigensolver failed to converge after {iters} iterations")]
    EigNoConvergence { iters: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NonSquareMatrix { rows: usize, cols: usize },

    #[error("index {index} outside set of size {size}")]
    IndexOutOfSet { index: usize, size: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("internal verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
