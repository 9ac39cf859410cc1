use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("map is not uniformly expanding: {0}")]
    NotExpanding(String),

    #[error("enumeration of {base}^{exponent} words exceeds the budget of {limit}")]
    BudgetExceeded {
        base: usize,
        exponent: usize,
        limit: u64,
    },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("degree mismatch: deg(f) = {f}, deg(g) = {g}; no conjugacy exists")]
    DegreeMismatch { f: u32, g: u32 },

    #[error("periodic point deduplication left {found} points, expected {expected}")]
    Deduplication { expected: usize, found: usize },

    #[error("value {value} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("functions lie on the boundary of the cone (Hilbert metric is infinite)")]
    ConeBoundary,

    #[error("no sign change for bisection: {0}")]
    NoSignChange(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of an iterative numerical method rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::Deduplication { .. } | Error::NoSignChange(_)
        )
    }
}
