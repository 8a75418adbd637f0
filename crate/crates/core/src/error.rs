use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the validated range of an algorithm.
    #[error("{what} = {value} is outside the supported range {range}")]
    Range {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A mathematical domain violation (e.g. division by a vanishing rate).
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A time grid is too coarse for the dynamics it is meant to resolve.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Non-finite numbers appeared during a computation.
    #[error("numeric error at t = {time}: {message}")]
    Numeric { time: f64, message: String },

    /// A least-squares fit could not be performed.
    #[error("fit error: {0}")]
    Fit(String),

    /// A computed quantity violates an invariant it must satisfy.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
