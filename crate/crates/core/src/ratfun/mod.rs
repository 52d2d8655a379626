//! Exact algebra for polynomials and rational functions of the sideband
//! frequency Ω: root finding, partial fractions, and the para-hermitian
//! reflection used by spectral factorization.
//!
//! All values are immutable after construction and safe to share across
//! threads; every operation is a pure function of its inputs.

mod factored;
mod partial;
mod poly;
mod rational;
mod roots;

pub use factored::{
    cross_residue_sum, eval_pole_terms, pole_terms, upper_half_residue_sum, FactoredPoly,
    FactoredRatio, FactoredRational, PoleTerm,
};
pub use partial::{partial_fractions, PartialFractionExpansion, MAX_POLE_ORDER};
pub use poly::Polynomial;
pub use rational::RationalFunction;
pub use roots::{cluster, expand_multiplicities, roots};
