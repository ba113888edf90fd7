use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("invalid size {size}: {reason}")]
    InvalidSize { size: usize, reason: &'static str },

    #[error("index {index} out of range for register of {len} atoms")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("state norm {norm_sqr} deviates from 1 by more than {tolerance}")]
    NotNormalized { norm_sqr: f64, tolerance: f64 },

    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },

    #[error("{what} of {requested} exceeds cap of {cap}")]
    CapExceeded { what: &'static str, requested: usize, cap: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },

    #[error("pair rotation needs distinct atoms, got ({0}, {0})")]
    DegeneratePair(usize),

    #[error("atom {0} appears twice in one round")]
    OverlappingRound(usize),

    #[error("photon ladder truncated at n_max = {n_max}: top-rung population {population:e}")]
    Truncation { n_max: usize, population: f64 },

    #[error("target of {target} atoms exceeds register of {available}")]
    TargetTooLarge { target: usize, available: usize },

    #[error("target of {target} atoms is not a power of two; reduction requires a randomness source")]
    ReductionRequired { target: usize },

    #[error("state has no weight in the single-excitation sector")]
    EmptyProjection,
}

impl Error {
    /// True for errors raised by numerical guards rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotNormalized { .. } | Error::NonFinite { .. } | Error::Truncation { .. } | Error::EmptyProjection
        )
    }
}
