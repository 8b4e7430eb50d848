use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tensor product dimension {dim} exceeds the configured maximum {max}")]
    CapacityExceeded { dim: usize, max: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("observable does not square to the identity (max deviation {deviation:e})")]
    NotInvolution { deviation: f64 },

    #[error("observables {first} and {second} do not commute (commutator norm {norm:e})")]
    NotCommuting { first: usize, second: usize, norm: f64 },

    #[error("state is not normalized (norm squared {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("cycle length {n} is below the minimum of {min}")]
    CycleTooShort { n: usize, min: usize },

    #[error("cycle coefficients must contain an odd number of -1 entries (found {negatives})")]
    EvenNegativeCount { negatives: usize },

    #[error("cycle length {n} exceeds the enumeration cap of {max}")]
    EnumerationCap { n: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
