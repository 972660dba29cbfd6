use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input vector")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("channel length {l} must be smaller than block length {n_c}")]
    ChannelTooLong { l: usize, n_c: usize },

    #[error("Gram matrix is singular or ill-conditioned (condition estimate {cond:.3e})")]
    SingularGram { cond: f64 },

    #[error("entry {index} has modulus {modulus} but a unimodular vector was required")]
    NonUnimodular { index: usize, modulus: f64 },

    #[error("reduced length {n} does not divide block length {n_c}")]
    NonDivisor { n_c: usize, n: usize },

    #[error("noise variance must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("no PCT candidates given")]
    EmptyCandidates,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}
