use thiserror::Error;

/// Errors raised by graph construction, model algebra, and inference.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph contains a directed cycle")]
    CyclicGraph,

    #[error("node {node} out of range for graph on {p} nodes")]
    NodeOutOfRange { node: usize, p: usize },

    #[error("invalid edge {from} -> {to}: {reason}")]
    InvalidEdge {
        from: usize,
        to: usize,
        reason: &'static str,
    },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("enumeration budget of {cap} exceeded")]
    BudgetExceeded { cap: usize },

    #[error("edge weight on {from} -> {to} is nonzero but the edge is not in the graph")]
    SupportViolation { from: usize, to: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("matrix is not a valid covariance: {0}")]
    NotCovariance(String),

    #[error("conditioning set for node {node} violates pa(i) <= A <= V \\ de(i)")]
    InvalidConditioningSet { node: usize },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("parent Gram matrix of node {node} is numerically singular")]
    SingularRegression { node: usize },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
