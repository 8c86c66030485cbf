use thiserror::Error;

/// Errors produced by the simulation laboratory.
#[derive(Debug, Error)]
pub enum FrdError {
    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("profile must have at least one agent and one issue")]
    EmptyProfile,
    #[error("committee size must be odd and at least 1, got {0}")]
    InvalidCommitteeSize(usize),
    #[error("committee size {k} exceeds the number of candidates {m}")]
    CommitteeTooLarge { k: usize, m: usize },
    #[error("committee members must be distinct candidate indices below {m}")]
    InvalidMembers { m: usize },
    #[error("rule {rule} needs {expected} ballots, got {found}")]
    BallotForm {
        rule: &'static str,
        expected: &'static str,
        found: &'static str,
    },
    #[error("C({m}, {k}) = {count} committees exceeds the enumeration limit of {limit}; shrink m or k")]
    EnumerationTooLarge {
        m: usize,
        k: usize,
        count: u128,
        limit: u128,
    },
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("unknown figure preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = FrdError> = std::result::Result<T, E>;
