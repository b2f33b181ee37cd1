//! Error type shared across the simulation library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Generation or simulation parameters violate their invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An edge insertion would corrupt the graph (self-loop or duplicate).
    #[error("invalid edge: {0}")]
    InvalidEdge(String),

    /// Two graphs that must agree (e.g. across a structural change) do not.
    #[error("graph mismatch: {0}")]
    GraphMismatch(String),

    /// A statistic has no defined value on the given input
    /// (zero denominator, zero variance, too few samples).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A serialized artifact could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}
