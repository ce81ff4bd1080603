use thiserror::Error;

/// Crate-wide error type. Contract violations are reported, never silently
/// repaired; the few tolerated numerical drifts are module-specific and
/// documented where they apply.
#[derive(Debug, Error)]
pub enum Error {
    #[error("register capacity exceeded: {requested} qubits (max {max})")]
    Capacity { requested: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver did not converge: {0}")]
    Eigen(String),

    #[error("unknown serial {0:#x}")]
    UnknownSerial(u64),

    #[error("serial space exhausted for {0}-qubit notes")]
    SerialSpaceExhausted(usize),

    #[error("query budget exceeded: spent {spent}, budget {budget}")]
    BudgetExceeded { spent: u64, budget: u64 },

    #[error("round cap {cap} exceeded")]
    RoundCap { cap: usize },

    #[error("state restoration stalled after {iterations} iterations")]
    RestorationStalled { iterations: usize },

    #[error("search failed: no marked item after {iterations} iterations")]
    NoMarkedItem { iterations: usize },

    #[error("optimizer failed to converge: {0}")]
    NonConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
