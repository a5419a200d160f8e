use thiserror::Error;

/// Errors surfaced by the exact-arithmetic and combinatorial kernels.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Division by the zero element of Q(q,t).
    #[error("division by zero in Q(q,t)")]
    DivisionByZero,

    /// A rational-function evaluation hit a vanishing denominator.
    #[error("singular evaluation: {0}")]
    SingularPoint(String),

    /// Structurally invalid input (bad shape, bad offsets, non-coprime pair, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configured resource cap was exceeded.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    /// Parse failure in one of the textual formats.
    #[error("parse error: {0}")]
    Parse(String),
}
