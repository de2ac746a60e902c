use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dataset has no groups")]
    EmptyDataset,

    #[error("group {0} is empty")]
    EmptyGroup(usize),

    #[error("observation kind does not match the model family: {0}")]
    FamilyMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),

    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),

    #[error("seating state failed consistency check:\n{0}")]
    InconsistentState(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("instance too large for exact enumeration: {customers} customers (max {max})")]
    InstanceTooLarge { customers: usize, max: usize },

    #[error("quadrature did not converge: relative change {rel:.3e} at {nodes} nodes")]
    QuadratureNonConvergence { rel: f64, nodes: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
