use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid prior: agent {agent}, atom {atom}: {reason}")]
    InvalidPrior {
        agent: usize,
        atom: usize,
        reason: String,
    },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("no atom lies inside [{lo}, {hi}]")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("{n} agents exceeds the enumeration bound of {max}")]
    TooManyAgents { n: usize, max: usize },
    #[error("value {value} for agent {agent} is not an atom of its prior")]
    OffSupport { agent: usize, value: f64 },
    #[error("product support of {size} tuples exceeds the exact-mode bound of {max}")]
    SupportTooLarge { size: u128, max: u128 },
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("expected valuation bound mu_max must be positive")]
    ZeroMeanPrior,
    #[error("stair mixing weight delta = {delta} exceeds 1; shrink epsilon")]
    DeltaOverflow { delta: f64 },
    #[error("payment loop exceeded {cap} iterations for agent {agent}")]
    IterationCapExceeded { agent: usize, cap: u64 },
    #[error("curves live on different atom grids")]
    GridMismatch,
    #[error("recursive ironing did not terminate within {0} iterations")]
    NonTermination(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
