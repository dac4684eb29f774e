use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid column: {0}")]
    InvalidColumn(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("problem size exceeds solver guard: {0}")]
    SizeGuard(String),
    #[error("linear program failed: {0}")]
    LpFailure(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("rounding step requires a fractional entry, but every entry is integral")]
    NoFractionalCell,
    #[error("conflicting fix for slot {slot}, content {content}")]
    FixConflict { slot: usize, content: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
