use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// `k < N - r` (and `k <= r`) is required by the reduced model.
    #[error("regime violation: k = {k} must satisfy k < N - r = {gap} and k <= r = {r}")]
    Regime { k: usize, gap: usize, r: usize },

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("eta class (l = {level}, j = {y_marked}) is not valid for k = {k}")]
    InvalidClass { level: usize, y_marked: u8, k: usize },

    #[error("cos(phi_{n}) = {cos} lies outside [-1, 1]")]
    CosineOutOfRange { n: usize, cos: f64 },

    #[error("degenerate denominator 1 - cos(t2 phi_{n}) = {value:e}")]
    DegenerateDenominator { n: usize, value: f64 },

    #[error("instance: {0}")]
    Instance(String),

    #[error("state dimension {required} exceeds the memory cap {cap}")]
    CapExceeded { required: u128, cap: u128 },

    #[error("numerical eigen-solver: {0}")]
    Numeric(String),

    #[error("state dump: {0}")]
    Dump(String),

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    /// Errors caused by the caller's configuration (bad parameters, regime,
    /// caps) as opposed to a failed computation.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::Regime { .. }
                | Error::InvalidClass { .. }
                | Error::Instance(_)
                | Error::CapExceeded { .. }
                | Error::Config(_)
                | Error::CosineOutOfRange { .. }
        )
    }
}
