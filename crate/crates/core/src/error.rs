use thiserror::Error;

/// Errors produced by construction and inference routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state space: {0}")]
    InvalidStateSpace(String),

    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("states belong to different state spaces")]
    SpaceMismatch,

    #[error("instance too large for exact mode: {size} joint states exceeds cap {cap}")]
    InstanceTooLarge { size: u128, cap: u128 },

    #[error("distributions have disjoint supports: zero normalizer")]
    DisjointSupports,

    #[error("parameter must be positive and finite, got {0}")]
    NonPositiveParameter(f64),

    #[error("non-finite parameter entry")]
    NonFiniteParameter,

    #[error("state {state:?} lies on a slicing hyperplane (non-generic)")]
    NonGenericSlicing { state: Vec<usize> },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("Hamming balls overlap")]
    OverlappingBalls,

    #[error("{0} is not a supported prime power (must be a prime power <= 9)")]
    UnsupportedField(u64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
