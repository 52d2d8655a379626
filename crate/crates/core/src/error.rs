//! Error types shared across the library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input outside the domain of an operation (degenerate polynomial,
    /// forbidden parameter value, real pole where none is allowed, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A spectrum handed to the factorizer is not a valid power spectral
    /// density (negative somewhere on the real axis).
    #[error("not a PSD: {0}")]
    NotAPsd(String),

    /// A spectrum cannot be split into half-plane factors (real-axis root of
    /// odd multiplicity).
    #[error("not factorizable: {0}")]
    NotFactorizable(String),

    /// Causal projection of a function that does not vanish at infinity.
    #[error("ambiguous causal projection: {0}")]
    AmbiguousProjection(String),

    /// A second-order moment integral diverges; reports the offending matrix
    /// entry or component and the pole neighbourhood.
    #[error("divergent moments: {0}")]
    DivergentMoments(String),

    /// The discrete Riccati iteration did not reach a steady state.
    #[error("no steady state: {0}")]
    NoSteadyState(String),

    /// A rational fit could not meet the requested tolerance; carries the
    /// achieved maximum deviation in dB.
    #[error("fit error: max deviation {achieved_db:.3} dB ({context})")]
    Fit { achieved_db: f64, context: String },

    /// Malformed tabular input.
    #[error("format error: {0}")]
    Format(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
