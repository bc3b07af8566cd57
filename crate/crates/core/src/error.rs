use thiserror::Error;

/// Errors raised by the concentration toolkit.
///
/// Variants split into two families: malformed or out-of-contract input
/// (`is_domain() == false`) and numerical-domain failures such as an
/// infinite exponent where a finite one is required.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("spectrum value at index {index} is not positive: {value}")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("spectrum sums to {sum}, which deviates from 1 by more than 1e-9")]
    NotNormalized { sum: f64 },

    #[error("type-class enumeration needs {count} compositions, above the cap of {cap}")]
    EnumerationCap { count: f64, cap: u64 },

    #[error("size {size} is outside 1..={dimension}")]
    InvalidSize { size: u64, dimension: String },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quantity is infinite at n = {n}")]
    InfiniteQuantity { n: u32 },

    #[error("feasible set is empty on the sampled grid: {0}")]
    EmptyFeasibleSet(String),

    #[error("invalid partition map: {0}")]
    InvalidPartition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("outside the numerical domain: {0}")]
    Domain(String),

    #[error("size {0} does not fit in 64 bits")]
    SizeOverflow(f64),
}

impl Error {
    /// True for numerical-domain failures, false for input validation failures.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::InfiniteQuantity { .. }
                | Error::EmptyFeasibleSet(_)
                | Error::Domain(_)
                | Error::SizeOverflow(_)
                | Error::EnumerationCap { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
