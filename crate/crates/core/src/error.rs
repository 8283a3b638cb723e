use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample size must be at least 2, got {0}")]
    SampleSizeTooSmall(u64),

    #[error("item count must be at least {min}, got {found}")]
    TooFewItems { min: u64, found: u64 },

    #[error("exception count {n_exceptions} exceeds item count {n_items}")]
    ExceptionsExceedItems { n_items: u64, n_exceptions: u64 },

    #[error("{name} must be a probability in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("Zipf exponent must be finite and nonnegative, got {0}")]
    InvalidExponent(f64),

    #[error("rank {rank} is outside 1..={n_items}")]
    RankOutOfRange { rank: u64, n_items: u64 },

    #[error("population size must be at least 1")]
    EmptyPopulation,

    #[error("speaker count {count} exceeds population size {pop_size}")]
    CountOutOfRange { count: u64, pop_size: u64 },

    #[error("population size {pop_size} exceeds the dense matrix cap {cap}")]
    MatrixTooLarge { pop_size: u64, cap: u64 },

    #[error("cohort weights must be nonempty")]
    EmptyWeights,

    #[error("cohort weight {index} is negative or not finite: {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("cohort weights sum to {sum}, expected 1 within 1e-12")]
    WeightSum { sum: f64 },

    #[error("history has {found} generations but weights have {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures caused by resource limits or numerical non-convergence
    /// rather than by invalid input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::MatrixTooLarge { .. } | Error::NotConverged { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { name, value })
    }
}
