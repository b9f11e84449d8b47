//! Crate-wide error type.

/// Errors produced by validation and by the numerical guards.
///
/// Validation failures (`InvalidMeasure`, `InvalidSet`, `InvalidParameter`,
/// `InvalidStrategy`, `NonFinite`) mean the inputs never described a
/// well-posed problem. Guard failures (`GuardViolation`, `GridCoverage`,
/// `Cfl`) mean the problem is well posed but too large or unstable for the
/// requested discretization.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid measure set: {0}")]
    InvalidSet(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("size guard violated: {0}")]
    GuardViolation(String),
    #[error("grid coverage: {0}")]
    GridCoverage(String),
    #[error("CFL condition violated: time step {dt} exceeds {limit} for h={h}, sigma2_high={sigma2_high}")]
    Cfl {
        dt: f64,
        limit: f64,
        h: f64,
        sigma2_high: f64,
    },
    #[error("cross-oracle mismatch: pde={pde} vs tree={tree}, tolerance {tolerance}")]
    CrossOracle { pde: f64, tree: f64, tolerance: f64 },
}

impl Error {
    /// True when the error is a size/stability guard rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::GuardViolation(_) | Error::GridCoverage(_) | Error::Cfl { .. } | Error::CrossOracle { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
