use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Enumeration of `P_[n]` was requested above the configured cap.
    #[error("n = {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Two objects that must share a state enumeration do not.
    #[error("state space mismatch: {0}")]
    Mismatch(String),

    /// The chain has no available move from the current state.
    #[error("absorbing state {0}: no transitions available")]
    Absorbing(String),

    /// The stationary system has a non-trivial kernel; this indicates a rate bug.
    #[error("generator is reducible: rank deficiency at column {0}")]
    Reducible(usize),

    #[error("iterative solver did not converge: residual {residual:e} after {iterations} sweeps")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("quadrature did not converge: error estimate {0:e}")]
    Quadrature(f64),

    /// Importance weights are all zero or non-finite.
    #[error("degenerate importance weights: {0}")]
    DegenerateWeights(String),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
