use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Precondition,
    Budget,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("arithmetic error: {0}")]
    Arithmetic(String),

    #[error("cannot parse value {0:?}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("negative weight on edge ({u}, {v})")]
    NegativeWeight { u: usize, v: usize },

    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("relation does not correspond under normalisation, witness tuple {witness:?}")]
    Normalisation { witness: Vec<usize> },

    #[error("set function is not superadditive: f({x:?}) + f({y:?}) > f(union)")]
    NotSuperadditive { x: Vec<usize>, y: Vec<usize> },

    #[error("empty solution space: lower bound {q} exceeds {n} - {p}")]
    InfeasibleBounds { q: usize, p: usize, n: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("assignment violates the {0} mode")]
    Mode(String),

    #[error("wrong domain: {0}")]
    Domain(String),

    #[error("evaluation budget exceeded: {needed} evaluations needed, limit {limit}")]
    BudgetExceeded { needed: u128, limit: u64 },

    #[error("language is neither SDS nor SEDS: {0}")]
    Unclassified(String),

    #[error("missing provenance for relation {0:?}")]
    MissingProvenance(String),

    #[error("certified bound violated: {0}")]
    BoundViolated(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse(_)
            | Error::InvalidInput(_)
            | Error::NegativeWeight { .. }
            | Error::VertexOutOfRange { .. }
            | Error::NotSuperadditive { .. }
            | Error::Json(_)
            | Error::Io(_) => ErrorKind::Input,
            Error::Normalisation { .. }
            | Error::InfeasibleBounds { .. }
            | Error::Precondition(_)
            | Error::Mode(_)
            | Error::Domain(_)
            | Error::Unclassified(_)
            | Error::MissingProvenance(_) => ErrorKind::Precondition,
            Error::BudgetExceeded { .. } => ErrorKind::Budget,
            Error::Arithmetic(_) | Error::BoundViolated(_) => ErrorKind::Internal,
        }
    }
}
