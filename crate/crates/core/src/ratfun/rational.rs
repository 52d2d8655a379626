//! Rational functions of the sideband frequency Ω.

use num_complex::Complex64;

use super::poly::Polynomial;
use super::roots::{expand_multiplicities, roots};
use crate::error::{Error, Result};
use crate::ROOT_CLUSTER_REL;

/// Maximum degree on which construction attempts root-based reduction.
const REDUCE_DEGREE_CAP: usize = 64;

/// A ratio of complex-coefficient polynomials, stored in reduced form:
/// numerator and denominator share no root within the root-matching
/// tolerance, and the denominator is monic.
#[derive(Debug, Clone)]
pub struct RationalFunction {
    numerator: Polynomial,
    denominator: Polynomial,
    proper: bool,
}

impl RationalFunction {
    /// Builds and reduces a rational function.
    ///
    /// Reduction cancels numerator/denominator roots that agree within the
    /// clustering tolerance and is verified by pointwise sampling; when the
    /// verification fails the unreduced form is kept.
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::domain("denominator is identically zero"));
        }
        let numerator = numerator.trim_junk_leading(1e-12);
        let denominator = denominator.trim_junk_leading(1e-12);
        if denominator.is_zero() {
            return Err(Error::domain("denominator is identically zero"));
        }
        let (num, den) = reduce(numerator, denominator);
        let proper = num.degree() <= den.degree() || num.is_zero();
        Ok(RationalFunction {
            numerator: num,
            denominator: den,
            proper,
        })
    }

    /// Builds without root-based reduction; used by model constructors that
    /// already know the factored denominator exactly. The denominator is
    /// still normalized to be monic.
    pub(crate) fn from_parts_unreduced(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::domain("denominator is identically zero"));
        }
        let lead = den.leading();
        let num = num.scale(lead.inv());
        let den = den.scale(lead.inv());
        let proper = num.degree() <= den.degree() || num.is_zero();
        Ok(RationalFunction {
            numerator: num,
            denominator: den,
            proper,
        })
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        let proper = p.degree() == 0;
        RationalFunction {
            numerator: p,
            denominator: Polynomial::one(),
            proper,
        }
    }

    pub fn zero() -> Self {
        Self::from_polynomial(Polynomial::zero())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_polynomial(Polynomial::constant(c))
    }

    pub fn constant_real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    /// True when deg(numerator) ≤ deg(denominator).
    pub fn proper(&self) -> bool {
        self.proper
    }

    /// True when deg(numerator) < deg(denominator), i.e. the function
    /// vanishes as Ω → ∞.
    pub fn strictly_proper(&self) -> bool {
        self.is_zero() || self.numerator.degree() < self.denominator.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn eval(&self, omega: Complex64) -> Complex64 {
        self.numerator.eval(omega) / self.denominator.eval(omega)
    }

    pub fn eval_real(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(omega, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        // common-denominator shortcut keeps model algebra from inflating degrees
        if same_poly(&self.denominator, &other.denominator) {
            return Self::new(
                self.numerator.add(&other.numerator),
                self.denominator.clone(),
            );
        }
        let num = self
            .numerator
            .mul(&other.denominator)
            .add(&other.numerator.mul(&self.denominator));
        let den = self.denominator.mul(&other.denominator);
        Self::new(num, den)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        RationalFunction {
            numerator: self.numerator.scale(c),
            denominator: self.denominator.clone(),
            proper: self.proper,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        Self::new(
            self.numerator.mul(&other.numerator),
            self.denominator.mul(&other.denominator),
        )
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::domain("division by zero rational function"));
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        Self::new(
            self.numerator.mul(&other.denominator),
            self.denominator.mul(&other.numerator),
        )
    }

    /// Multiplication by the polynomial `p`.
    pub fn mul_poly(&self, p: &Polynomial) -> Result<Self> {
        Self::new(self.numerator.mul(p), self.denominator.clone())
    }

    /// The para-hermitian reflection g(Ω) = [f(Ω*)]*.
    ///
    /// Coefficients are conjugated; on the real axis this is complex
    /// conjugation, and it is an involution.
    pub fn reflect(&self) -> Self {
        RationalFunction {
            numerator: self.numerator.conj_reflect(),
            denominator: self.denominator.conj_reflect(),
            proper: self.proper,
        }
    }

    /// Numerator roots (zeros), clustered with multiplicity.
    pub fn zeros(&self) -> Result<Vec<(Complex64, usize)>> {
        if self.numerator.degree() == 0 || self.numerator.is_zero() {
            return Ok(Vec::new());
        }
        roots(&self.numerator)
    }

    /// Denominator roots (poles), clustered with multiplicity.
    pub fn poles(&self) -> Result<Vec<(Complex64, usize)>> {
        if self.denominator.degree() == 0 {
            return Ok(Vec::new());
        }
        roots(&self.denominator)
    }

    /// Characteristic frequency scale of the function.
    pub fn characteristic_scale(&self) -> f64 {
        let sn = if self.numerator.degree() >= 1 {
            self.numerator.characteristic_scale()
        } else {
            0.0
        };
        let sd = if self.denominator.degree() >= 1 {
            self.denominator.characteristic_scale()
        } else {
            0.0
        };
        let s = sn.max(sd);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }
}

fn same_poly(a: &Polynomial, b: &Polynomial) -> bool {
    if a.degree() != b.degree() || a.coeffs().len() != b.coeffs().len() {
        return false;
    }
    let scale = a.max_coeff_norm().max(b.max_coeff_norm());
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .all(|(x, y)| (x - y).norm() <= 1e-14 * scale)
}

fn reduce(num: Polynomial, den: Polynomial) -> (Polynomial, Polynomial) {
    if num.is_zero() {
        return (Polynomial::zero(), Polynomial::one());
    }
    let (num, den) = cancel_common_roots(num, den);
    // normalize the denominator to be monic
    let lead = den.leading();
    (num.scale(lead.inv()), den.scale(lead.inv()))
}

fn cancel_common_roots(num: Polynomial, den: Polynomial) -> (Polynomial, Polynomial) {
    if num.degree() == 0 || den.degree() == 0 {
        return (num, den);
    }
    if num.degree() > REDUCE_DEGREE_CAP || den.degree() > REDUCE_DEGREE_CAP {
        return (num, den);
    }
    let (num_roots, den_roots) = match (roots(&num), roots(&den)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return (num, den),
    };
    let mut num_flat = expand_multiplicities(&num_roots);
    let den_flat = expand_multiplicities(&den_roots);
    let scale = num
        .characteristic_scale()
        .max(den.characteristic_scale());
    // tight floor: true common factors agree to ~1e-13·scale, while
    // regularization-displaced neighbours sit ~1e-9·scale apart and must
    // never be identified
    let floor = 1e-12 * scale;

    // matched pairs deflate both sides in place; the unmatched structure
    // keeps its original coefficient representation
    let mut pairs: Vec<(Complex64, Complex64)> = Vec::new();
    for dr in den_flat {
        let mut best: Option<(usize, f64)> = None;
        for (i, nr) in num_flat.iter().enumerate() {
            let dist = (dr - nr).norm();
            let tol = (ROOT_CLUSTER_REL * dr.norm().max(nr.norm())).max(floor);
            if dist <= tol && best.map_or(true, |(_, bd)| dist < bd) {
                best = Some((i, dist));
            }
        }
        if let Some((i, _)) = best {
            let nr = num_flat.swap_remove(i);
            pairs.push((nr, dr));
        }
    }
    if pairs.is_empty() {
        return (num, den);
    }
    // smallest roots first: dividing out exact Ω-factors before any large
    // root keeps the sparse low-order structure exact
    pairs.sort_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap());
    let mut new_num = num.clone();
    let mut new_den = den.clone();
    let cancelled = pairs.len();
    for (nr, dr) in pairs {
        new_num = new_num.deflate_root(nr);
        new_den = new_den.deflate_root(dr);
    }

    // pointwise verification on real frequencies away from the poles
    let mut ok = true;
    for k in 0..5 {
        let omega = Complex64::new(scale * (0.37 + 1.91 * k as f64), 0.0);
        let orig_den = den.eval(omega);
        let red_den = new_den.eval(omega);
        if orig_den.norm() < 1e-12 * den.eval_magnitude(omega)
            || red_den.norm() < 1e-12 * new_den.eval_magnitude(omega)
        {
            continue;
        }
        let orig = num.eval(omega) / orig_den;
        let red = new_num.eval(omega) / red_den;
        let denom = orig.norm().max(red.norm());
        if denom > 0.0 && (orig - red).norm() > 1e-6 * denom {
            ok = false;
            break;
        }
    }
    if ok {
        (new_num, new_den)
    } else {
        if std::env::var("RED_DEBUG").is_ok() {
            eprintln!(
                "reduce reverted: num deg {} den deg {}, cancelled {cancelled}",
                num.degree(),
                den.degree()
            );
        }
        (num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn common_factor_cancels() {
        // (Ω² − 1)/(Ω − 1) → Ω + 1
        let num = Polynomial::from_real(&[-1.0, 0.0, 1.0]);
        let den = Polynomial::from_real(&[-1.0, 1.0]);
        let f = RationalFunction::new(num, den).unwrap();
        assert_eq!(f.denominator().degree(), 0);
        assert_eq!(f.numerator().degree(), 1);
        let v = f.eval(c(3.0, 0.0));
        assert!((v - c(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn reflect_involution_and_pole_map() {
        // poles at −i and −2i reflect to +i and +2i
        let den = Polynomial::from_roots(
            c(1.0, 0.0),
            &[(c(0.0, -1.0), 1), (c(0.0, -2.0), 1)],
        );
        let f = RationalFunction::new(Polynomial::one(), den).unwrap();
        let g = f.reflect();
        let poles = g.poles().unwrap();
        assert!(poles.iter().any(|(p, _)| (p - c(0.0, 1.0)).norm() < 1e-12));
        assert!(poles.iter().any(|(p, _)| (p - c(0.0, 2.0)).norm() < 1e-12));
        let back = g.reflect();
        let x = c(0.35, 0.0);
        assert!((back.eval(x) - f.eval(x)).norm() < 1e-14);
    }

    #[test]
    fn real_coefficients_fixed_by_reflection() {
        let f = RationalFunction::new(
            Polynomial::from_real(&[1.0, 0.0, 2.0]),
            Polynomial::from_real(&[4.0, 0.0, 1.0]),
        )
        .unwrap();
        let g = f.reflect();
        let x = c(1.7, 0.0);
        assert!((g.eval(x) - f.eval(x)).norm() < 1e-14);
    }

    #[test]
    fn add_with_shared_denominator_keeps_degree() {
        let den = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let a = RationalFunction::new(Polynomial::from_real(&[1.0]), den.clone()).unwrap();
        let b = RationalFunction::new(Polynomial::from_real(&[0.0, 1.0]), den).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.denominator().degree(), 2);
        let v = s.eval(c(2.0, 0.0));
        assert!((v - c(3.0 / 5.0, 0.0)).norm() < 1e-14);
    }
}
