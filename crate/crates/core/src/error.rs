use thiserror::Error;

#[derive(Debug, Error)]
pub enum PccError {
    #[error("vertex count must be even and at least 4, got {0}")]
    OddN(usize),
    #[error("probability {name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("degenerate parameters: need q < p, got p = {p}, q = {q}")]
    Degenerate { p: f64, q: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label at index {index} is {value}, expected +1 or -1")]
    NonBinary { index: usize, value: i64 },
    #[error("partition is unbalanced (sum of labels = {0})")]
    Unbalanced(i64),
    #[error("n = {n} exceeds the limit of {limit} for this operation")]
    TooLarge { n: usize, limit: usize },
    #[error("candidate is not in the kernel of D - B (entry {index} of (D - B)x is {value})")]
    KernelMismatch { index: usize, value: i64 },
    #[error("matrix is not positive semidefinite (pivot {pivot} = {value:e})")]
    NotPsd { pivot: usize, value: f64 },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PccError>;
