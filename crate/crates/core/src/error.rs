use thiserror::Error;

#[derive(Debug, Error)]
pub enum OedError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("instance violates invariants: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),

    #[error("failed to parse instance: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("point is outside the objective domain (information matrix is singular)")]
    Domain,

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("infeasible bound box: {0}")]
    InfeasibleBox(String),

    #[error("enumeration would produce more than {cap} points")]
    TooManyPoints { cap: usize },

    #[error("no domain-feasible integer point exists")]
    AllInfeasible,

    #[error("no domain-feasible start point found after {0} attempts")]
    NoStart(usize),

    #[error("{0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, OedError>;
