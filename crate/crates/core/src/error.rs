use thiserror::Error;

/// Errors raised by the backends and the generic drivers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("element {index} is out of range for a group of order {order}")]
    ElementOutOfRange { index: usize, order: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("map does not define a homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("endomorphism is not bijective")]
    NotBijective,

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid group table: {0}")]
    InvalidTable(String),

    #[error("generators do not generate the group ({reached} of {order} elements reached)")]
    NotGenerating { reached: usize, order: usize },

    #[error("{what} exceeded the cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("emptiness probe is inconsistent at n = {n}: {detail}")]
    InconsistentProbe { n: u64, detail: String },

    #[error("tail must be nonempty")]
    EmptyTail,

    #[error("tail breaks the orbit relation at position {0}")]
    BrokenTail(usize),

    #[error("target set is invalid: {0}")]
    InvalidTarget(String),

    #[error("relator {relator} does not act trivially: {detail}")]
    RelatorViolation { relator: usize, detail: String },

    #[error("invalid word: {0}")]
    InvalidWord(String),
}

impl Error {
    /// True for errors caused by a resource cap or enumeration budget rather
    /// than by malformed input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::BudgetExceeded(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
