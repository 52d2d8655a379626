//! Conditional Gaussian states of continuously measured mechanical systems.
//!
//! The library computes the steady-state conditional covariance of test-mass
//! position and momentum (and auxiliary cavity quadratures) under continuous
//! linear measurement, using causal Wiener filtering on rational noise
//! spectra. It covers
//!
//! * exact rational-function algebra in the sideband frequency Ω
//!   ([`ratfun`]),
//! * spectral factorization of power spectral densities and causal-part
//!   extraction ([`factorize`]),
//! * the generic conditioning engine: Wiener filters, conditional
//!   covariances by contour integration, and an independent discrete
//!   Riccati/Kalman oracle ([`wiener`]),
//! * scalar figures of merit on Gaussian states ([`gstate`]),
//! * closed-form Markovian measurement models with homodyne readout and
//!   input squeezing ([`markov`]),
//! * two-mirror entanglement assembly and maximization ([`entangle`]),
//! * finite-bandwidth and detuned cavity models ([`cavity`]),
//! * colored classical noise budgets with rational power-law fits
//!   ([`budget`]).

pub mod budget;
pub mod cavity;
pub mod entangle;
pub mod error;
pub mod factorize;
pub mod gstate;
pub(crate) mod linalg;
pub mod markov;
pub mod optimize;
pub mod quadrature;
pub mod ratfun;
pub mod wiener;

pub use error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Relative tolerance below which two roots are merged into a multiple root.
pub(crate) const ROOT_CLUSTER_REL: f64 = 1e-7;

/// Relative imaginary displacement applied to real-axis roots when a strict
/// half-plane assignment is required.
pub(crate) const EPS_DISPLACE_REL: f64 = 1e-9;

/// Relative threshold for scale-aware trimming of noise leading
/// coefficients after cancelling subtractions.
pub(crate) const COEFF_TRIM_REL: f64 = 1e-10;
