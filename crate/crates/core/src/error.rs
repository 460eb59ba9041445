use thiserror::Error;

pub type Result<T, E = BisectError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisectError {
    #[error("n must be even and at least 2 (got {0})")]
    InvalidSize(usize),

    #[error("partition is not balanced: {left} elements on side 0, expected {expected}")]
    Unbalanced { left: usize, expected: usize },

    #[error("element universes differ: {0} vs {1} elements")]
    UniverseMismatch(usize, usize),

    #[error("element {element} out of range for n = {n}")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("request endpoints must differ (got element {0} twice)")]
    SelfRequest(usize),

    #[error("no component-preserving balanced partition exists")]
    NoPreservingPartition,

    #[error("exact OPT needs {states} partition states, above the cap of {cap}")]
    Capacity { states: u128, cap: u128 },

    #[error("monitor {lemma} failed at step {step}: {witness}")]
    Monitor {
        lemma: String,
        step: usize,
        witness: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for BisectError {
    fn from(e: std::io::Error) -> Self {
        BisectError::Io(e.to_string())
    }
}

impl BisectError {
    pub fn usage(msg: impl Into<String>) -> Self {
        BisectError::Usage(msg.into())
    }
}
