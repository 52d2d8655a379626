//! Partial fraction expansion of rational functions.

use num_complex::Complex64;

use super::factored::{pole_terms, FactoredPoly, FactoredRatio, PoleTerm};
use super::poly::Polynomial;
use super::rational::RationalFunction;
use crate::error::{Error, Result};

/// Highest pole multiplicity supported by the expansion.
pub const MAX_POLE_ORDER: usize = 4;

/// f = polynomial_part + Σ_k Σ_j residues[j] / (Ω − pole_k)^{j+1}.
#[derive(Debug, Clone)]
pub struct PartialFractionExpansion {
    pub polynomial_part: Polynomial,
    pub terms: Vec<PoleTerm>,
}

impl PartialFractionExpansion {
    pub fn eval(&self, omega: Complex64) -> Complex64 {
        let mut acc = self.polynomial_part.eval(omega);
        for t in &self.terms {
            acc += t.eval(omega);
        }
        acc
    }

    /// Recombines the expansion into a single rational function.
    pub fn recombine(&self) -> Result<RationalFunction> {
        let mut acc = RationalFunction::from_polynomial(self.polynomial_part.clone());
        for t in &self.terms {
            acc = acc.add(&term_rational(t)?)?;
        }
        Ok(acc)
    }
}

fn term_rational(t: &PoleTerm) -> Result<RationalFunction> {
    let mut acc = RationalFunction::zero();
    let lin = Polynomial::linear_from_root(t.pole);
    let mut den = Polynomial::one();
    for &c in &t.coeffs {
        den = den.mul(&lin);
        let piece = RationalFunction::new(Polynomial::constant(c), den.clone())?;
        acc = acc.add(&piece)?;
    }
    Ok(acc)
}

/// Partial fraction expansion of `f`.
///
/// Pole multiplicities above [`MAX_POLE_ORDER`] are rejected.
pub fn partial_fractions(f: &RationalFunction) -> Result<PartialFractionExpansion> {
    if f.is_zero() {
        return Ok(PartialFractionExpansion {
            polynomial_part: Polynomial::zero(),
            terms: Vec::new(),
        });
    }
    let (quot, rem) = f.numerator().div_rem(f.denominator());
    if f.denominator().degree() == 0 {
        return Ok(PartialFractionExpansion {
            polynomial_part: quot,
            terms: Vec::new(),
        });
    }
    let poles = f.poles()?;
    for &(p, m) in &poles {
        if m > MAX_POLE_ORDER {
            return Err(Error::domain(format!(
                "pole at {p} has multiplicity {m} > {MAX_POLE_ORDER}"
            )));
        }
    }
    let den_lead = f.denominator().leading();
    let ratio = FactoredRatio {
        num: rem,
        den: FactoredPoly::from_roots(den_lead, poles),
    };
    let terms = pole_terms(&ratio)?;
    Ok(PartialFractionExpansion {
        polynomial_part: quot,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lorentzian_split() {
        // 1/(Ω²+1) → (−i/2)/(Ω−i) + (i/2)/(Ω+i)
        let f = RationalFunction::new(Polynomial::one(), Polynomial::from_real(&[1.0, 0.0, 1.0]))
            .unwrap();
        let pf = partial_fractions(&f).unwrap();
        assert!(pf.polynomial_part.is_zero());
        assert_eq!(pf.terms.len(), 2);
        for t in &pf.terms {
            if (t.pole - c(0.0, 1.0)).norm() < 1e-12 {
                assert!((t.coeffs[0] - c(0.0, -0.5)).norm() < 1e-12);
            } else {
                assert!((t.coeffs[0] - c(0.0, 0.5)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn improper_fraction_gets_polynomial_part() {
        // (Ω²+1)/(Ω²+4) = 1 − 3/(Ω²+4); residues ±3i/4 at ∓2i
        let f = RationalFunction::new(
            Polynomial::from_real(&[1.0, 0.0, 1.0]),
            Polynomial::from_real(&[4.0, 0.0, 1.0]),
        )
        .unwrap();
        let pf = partial_fractions(&f).unwrap();
        assert_eq!(pf.polynomial_part.degree(), 0);
        assert!((pf.polynomial_part.coeff(0) - c(1.0, 0.0)).norm() < 1e-12);
        for t in &pf.terms {
            if (t.pole - c(0.0, 2.0)).norm() < 1e-12 {
                assert!((t.coeffs[0] - c(0.0, 0.75)).norm() < 1e-12, "{:?}", t);
            } else {
                assert!((t.coeffs[0] - c(0.0, -0.75)).norm() < 1e-12, "{:?}", t);
            }
        }
    }

    #[test]
    fn recombination_matches_pointwise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..20 {
            // random proper rational with well-separated poles
            let mut poles: Vec<Complex64> = Vec::new();
            while poles.len() < 4 {
                let cand = c(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..2.0))
                    * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                if poles.iter().all(|p| (p - cand).norm() > 1e-2) {
                    poles.push(cand);
                }
            }
            let den = Polynomial::from_roots(
                c(1.0, 0.0),
                &poles.iter().map(|&p| (p, 1)).collect::<Vec<_>>(),
            );
            let num = Polynomial::new(
                (0..3)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            );
            let f = RationalFunction::new(num, den).unwrap();
            let pf = partial_fractions(&f).unwrap();
            for k in 0..100 {
                let omega = c(-8.0 + 0.16 * k as f64 + 0.03, 0.0);
                let direct = f.eval(omega);
                let recon = pf.eval(omega);
                let scale = direct.norm().max(1e-12);
                assert!(
                    (direct - recon).norm() / scale < 1e-9,
                    "mismatch at {omega}: {direct} vs {recon}"
                );
            }
        }
    }

    #[test]
    fn quintuple_pole_rejected() {
        let den = Polynomial::from_roots(c(1.0, 0.0), &[(c(0.0, 1.0), 5)]);
        let f = RationalFunction::new(Polynomial::one(), den).unwrap();
        assert!(matches!(partial_fractions(&f), Err(Error::Domain(_))));
    }
}
