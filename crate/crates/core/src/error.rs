use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weight {weight} at atom {index} is negative")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("weights sum to {sum}, expected 1")]
    WeightsNotNormalized { sum: f64 },

    #[error("probability space needs at least one atom")]
    EmptySpace,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value {value} at atom {index} is not +1 or -1")]
    NotSign { index: usize, value: f64 },

    #[error("identity a(w)^2 = 1 fails at atom {index} (value {value})")]
    IdentityViolated { index: usize, value: f64 },

    #[error("trace average has imaginary part {imag}")]
    NonRealAverage { imag: f64 },

    #[error("matrix is not Hermitian (deviation {deviation})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid realizability problem: {0}")]
    InvalidProblem(String),

    #[error("oracle supports at most 3 variables, got {n}")]
    TooLarge { n: usize },

    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("context angles are inconsistent: {0}")]
    AngleMismatch(String),
}
