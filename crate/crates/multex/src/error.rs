//! Error type shared by every module of the crate.

use num::BigUint;

/// Everything that can go wrong while building shapes, laws, measures,
/// simulations, or reports.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An exhaustive enumeration would exceed the configured budget.
    #[error("state space too large: {configurations} configurations exceed the cap of {cap}")]
    StateSpaceTooLarge { configurations: BigUint, cap: u64 },
    /// Symmetrization over all within-class permutations would exceed the budget.
    #[error("permutation space too large: {tuples} permutation tuples exceed the cap of {cap}")]
    PermutationSpaceTooLarge { tuples: BigUint, cap: u64 },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
    #[error("invalid permutation vector: {0}")]
    InvalidPermutation(String),
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("law is not multi-exchangeable; symmetrize it first")]
    NotMultiExchangeable,
    #[error("empty sample prefix")]
    EmptyPrefix,
    #[error("tuple length must be at least 1")]
    ZeroTupleLength,
    #[error("tuple length {k} exceeds {max}")]
    TupleTooLong { k: usize, max: usize },
    #[error("measures live on different point sets")]
    SpaceMismatch,
    #[error("class {class} frequency {freq} is not a multiple of 1/{size}")]
    NonAtomicFrequency {
        class: usize,
        freq: String,
        size: usize,
    },
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid class sizes: {0}")]
    InvalidSizes(String),
    #[error("need at least {need} replications, got {got}")]
    TooFewReplications { need: usize, got: usize },
    #[error("size list must be strictly increasing")]
    UnsortedSweep,
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
