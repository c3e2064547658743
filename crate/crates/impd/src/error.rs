use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum ImpdError {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop on node {0} is not allowed")]
    SelfLoop(usize),

    #[error("arc ({tail}, {head}) has invalid weight {weight}; weights must lie in (0, 1]")]
    BadWeight { tail: usize, head: usize, weight: f64 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A size guard was exceeded (exact methods requested on an oversized input).
    /// The CLI maps this variant to exit code 2.
    #[error("guard exceeded: {0}")]
    Guard(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ImpdError>;
