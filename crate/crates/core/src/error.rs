use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operators act on different bases")]
    BasisMismatch,

    #[error("operator is not flagged Hermitian")]
    NotHermitian,

    #[error("interior margin {margin} must be smaller than the smallest cutoff {min_cutoff}")]
    InvalidMargin { margin: usize, min_cutoff: usize },

    #[error(
        "epsilon does not satisfy the dark-state condition: no real bias exists \
         (bracketed expression = {value:.6e} < 0)"
    )]
    NoDarkBias { value: f64 },

    #[error("parameter condition violated: {0}")]
    ParameterCondition(String),

    #[error("singular denominator: {0}")]
    SingularDenominator(String),

    #[error("Hilbert-space dimension {dim} exceeds the dense limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("no dark state registered on this sweep")]
    DarkStateNotRegistered,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
