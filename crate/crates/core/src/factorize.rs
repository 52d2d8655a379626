//! Spectral factorization of power spectral densities and causal-part
//! extraction.
//!
//! A valid rational PSD splits as S(Ω) = s⁺(Ω)·s⁻(Ω) where s⁺ and its
//! inverse are analytic in the upper half plane (all roots strictly below
//! the real axis) and s⁻ = reflect(s⁺). Real-axis roots of even multiplicity
//! are split evenly between the factors, displaced off the axis by an
//! infinitesimal ∓iε so that downstream half-plane logic never sees an
//! exactly-real root; the marginally stable free mass is the canonical case.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ratfun::{
    partial_fractions, pole_terms, FactoredPoly, FactoredRatio, PoleTerm, Polynomial,
    RationalFunction,
};
use crate::EPS_DISPLACE_REL;

/// Causal/anticausal factor pair of a PSD.
#[derive(Debug, Clone)]
pub struct SpectralFactorPair {
    /// Analytic (with its inverse) in the upper half plane: roots below axis.
    pub s_plus: RationalFunction,
    /// Analytic (with its inverse) in the lower half plane: roots above axis.
    pub s_minus: RationalFunction,
}

/// Internal factored form of the pair, used by the conditioning pipeline.
#[derive(Debug, Clone)]
pub(crate) struct FactoredSpectralPair {
    pub gain: f64,
    pub zeros_lower: Vec<(Complex64, usize)>,
    pub poles_lower: Vec<(Complex64, usize)>,
}

impl FactoredSpectralPair {
    pub fn s_plus(&self) -> RationalFunction {
        let num = Polynomial::from_roots(
            Complex64::new(self.gain.sqrt(), 0.0),
            &self.zeros_lower,
        );
        let den = Polynomial::from_roots(Complex64::new(1.0, 0.0), &self.poles_lower);
        RationalFunction::new(num, den).expect("nonzero denominator")
    }

    pub fn s_minus(&self) -> RationalFunction {
        self.s_plus().reflect()
    }
}

/// Splits a PSD into its causal/anticausal factor pair.
///
/// The input must be real and nonnegative on the real axis, without real
/// poles; real-axis zeros must occur with even multiplicity. The pair is
/// canonicalized by a positive real leading-coefficient ratio, and the
/// product is verified against the input at 100 real frequencies.
pub fn spectral_factorize(psd: &RationalFunction) -> Result<SpectralFactorPair> {
    let pair = factorize_roots(psd)?;
    let s_plus = pair.s_plus();
    let s_minus = pair.s_minus();
    verify_split(psd, &s_plus, &s_minus)?;
    Ok(SpectralFactorPair { s_plus, s_minus })
}

/// Whitening filter 1/s⁺: |whiten(Ω)|²·S(Ω) = 1 on the real axis.
pub fn whiten(psd: &RationalFunction) -> Result<RationalFunction> {
    let pair = spectral_factorize(psd)?;
    RationalFunction::new(
        pair.s_plus.denominator().clone(),
        pair.s_plus.numerator().clone(),
    )
}

pub(crate) fn factorize_roots(psd: &RationalFunction) -> Result<FactoredSpectralPair> {
    if psd.is_zero() {
        return Err(Error::NotAPsd("zero spectrum".into()));
    }
    check_even_real(psd)?;
    check_nonnegative(psd)?;

    let num_deg = psd.numerator().degree();
    let den_deg = psd.denominator().degree();
    if num_deg % 2 != 0 || den_deg % 2 != 0 {
        return Err(Error::NotFactorizable(format!(
            "odd numerator/denominator degrees ({num_deg}/{den_deg})"
        )));
    }

    let gain = psd.numerator().leading() / psd.denominator().leading();
    if gain.re <= 0.0 || gain.im.abs() > 1e-8 * gain.norm() {
        return Err(Error::NotAPsd(format!(
            "leading coefficient ratio {gain} is not positive real"
        )));
    }

    let scale = psd.characteristic_scale();
    let zeros = if num_deg >= 1 { psd.zeros()? } else { Vec::new() };
    let poles = if den_deg >= 1 { psd.poles()? } else { Vec::new() };

    let zeros_lower = lower_half_selection(&zeros, scale, false)?;
    let poles_lower = lower_half_selection(&poles, scale, true)?;

    Ok(FactoredSpectralPair {
        gain: gain.re,
        zeros_lower,
        poles_lower,
    })
}

/// Selects the lower-half-plane representative of each root pair.
///
/// Real-axis roots (within the clustering band) need even multiplicity; half
/// goes to the lower factor displaced by −iε. Real-axis poles are rejected.
fn lower_half_selection(
    roots: &[(Complex64, usize)],
    scale: f64,
    are_poles: bool,
) -> Result<Vec<(Complex64, usize)>> {
    let band = crate::ROOT_CLUSTER_REL * scale;
    let eps = EPS_DISPLACE_REL * scale;
    let mut lower = Vec::new();
    let mut upper_count = 0usize;
    let mut lower_count = 0usize;
    for &(r, m) in roots {
        if r.im < -band {
            lower.push((r, m));
            lower_count += m;
        } else if r.im > band {
            upper_count += m;
        } else {
            if m % 2 != 0 {
                let kind = if are_poles { "pole" } else { "zero" };
                return Err(Error::NotFactorizable(format!(
                    "real-axis {kind} of odd multiplicity {m} at Ω = {:.6e}",
                    r.re
                )));
            }
            lower.push((Complex64::new(r.re, -eps), m / 2));
            lower_count += m / 2;
            upper_count += m / 2;
        }
    }
    if lower_count != upper_count {
        return Err(Error::NotFactorizable(format!(
            "half-plane root counts differ ({lower_count} below vs {upper_count} above)"
        )));
    }
    Ok(lower)
}

fn check_even_real(psd: &RationalFunction) -> Result<()> {
    let reflected = psd.reflect();
    let scale = psd.characteristic_scale();
    for k in 0..7 {
        let omega = Complex64::new(scale * (0.083 + 0.911 * k as f64), 0.0);
        let a = psd.eval(omega);
        let b = reflected.eval(omega);
        let c = psd.eval(-omega);
        let mag = a.norm().max(1e-300);
        if (a - b).norm() > 1e-7 * mag || (a - c).norm() > 1e-7 * mag {
            return Err(Error::NotAPsd(
                "spectrum is not an even real function on the real axis".into(),
            ));
        }
    }
    Ok(())
}

/// Samples 256 log-spaced frequencies plus the real parts of all stationary
/// points of the PSD.
fn check_nonnegative(psd: &RationalFunction) -> Result<()> {
    let scale = psd.characteristic_scale();
    let mut probes: Vec<f64> = (0..256)
        .map(|k| scale * 10f64.powf(-6.0 + 12.0 * k as f64 / 255.0))
        .collect();
    // stationary points: zeros of N'D − ND'
    let n = psd.numerator();
    let d = psd.denominator();
    let dnum = n.derivative().mul(d).sub(&n.mul(&d.derivative()));
    if dnum.degree() >= 1 && !dnum.is_zero() {
        if let Ok(sts) = crate::ratfun::roots(&dnum) {
            probes.extend(sts.iter().map(|(r, _)| r.re.abs()));
        }
    }
    for &w in &probes {
        let v = psd.eval_real(w);
        let local = psd.numerator().eval_magnitude(Complex64::new(w, 0.0))
            / psd
                .denominator()
                .eval(Complex64::new(w, 0.0))
                .norm()
                .max(1e-300);
        if v.re < -1e-9 * local.max(v.norm()) {
            return Err(Error::NotAPsd(format!(
                "negative value {:.3e} at Ω = {:.3e}",
                v.re, w
            )));
        }
    }
    Ok(())
}

fn verify_split(
    psd: &RationalFunction,
    s_plus: &RationalFunction,
    s_minus: &RationalFunction,
) -> Result<()> {
    let scale = psd.characteristic_scale();
    for k in 0..100 {
        let w = scale * 10f64.powf(-3.0 + 6.0 * k as f64 / 99.0);
        let target = psd.eval_real(w);
        let product = s_plus.eval_real(w) * s_minus.eval_real(w);
        let mag = target.norm().max(1e-300);
        if (target - product).norm() > 1e-8 * mag {
            return Err(Error::Numerical(format!(
                "factor product deviates by {:.2e} at Ω = {:.3e}",
                (target - product).norm() / mag,
                w
            )));
        }
    }
    Ok(())
}

/// Causal projection [F]₊: the partial-fraction terms of a strictly proper
/// rational function whose poles lie in the lower half plane, i.e. the part
/// whose inverse Fourier transform (e^{−iΩt} convention) is supported at
/// positive times.
pub fn causal_part(f: &RationalFunction) -> Result<RationalFunction> {
    let (causal, _) = causal_anticausal(f)?;
    terms_to_rational(&causal)
}

/// Anticausal remainder F − [F]₊ (upper-half poles).
pub fn anticausal_part(f: &RationalFunction) -> Result<RationalFunction> {
    let (_, anti) = causal_anticausal(f)?;
    terms_to_rational(&anti)
}

/// Splits a strictly proper rational function into causal and anticausal
/// partial-fraction term groups.
pub fn causal_anticausal(f: &RationalFunction) -> Result<(Vec<PoleTerm>, Vec<PoleTerm>)> {
    if f.is_zero() {
        return Ok((Vec::new(), Vec::new()));
    }
    if !f.strictly_proper() {
        return Err(Error::AmbiguousProjection(
            "function does not vanish as Ω → ∞".into(),
        ));
    }
    let pf = partial_fractions(f)?;
    split_terms(&pf.terms, f.characteristic_scale())
}

pub(crate) fn split_terms(
    terms: &[PoleTerm],
    scale: f64,
) -> Result<(Vec<PoleTerm>, Vec<PoleTerm>)> {
    let band = 1e-12 * scale;
    let mut causal = Vec::new();
    let mut anticausal = Vec::new();
    for t in terms {
        if t.pole.im < -band {
            causal.push(t.clone());
        } else if t.pole.im > band {
            anticausal.push(t.clone());
        } else {
            return Err(Error::domain(format!(
                "real pole at Ω = {:.6e} has no causal assignment",
                t.pole.re
            )));
        }
    }
    Ok((causal, anticausal))
}

#[allow(dead_code)]
pub(crate) fn causal_split_factored(
    ratio: &FactoredRatio,
) -> Result<(Vec<PoleTerm>, Vec<PoleTerm>)> {
    let terms = pole_terms(ratio)?;
    split_terms(&terms, ratio.den.characteristic_scale())
}

/// Recombines pole terms into a rational function over their common
/// denominator.
pub fn terms_to_rational(terms: &[PoleTerm]) -> Result<RationalFunction> {
    if terms.is_empty() {
        return Ok(RationalFunction::zero());
    }
    let mut den = FactoredPoly::one();
    for t in terms {
        den.add_root(t.pole, t.order());
    }
    let den_poly = den.expand();
    let mut num = Polynomial::zero();
    for t in terms {
        for (j, &c) in t.coeffs.iter().enumerate() {
            // c/(Ω−p)^{j+1} · den(Ω) = c · Π remaining factors
            let mut rest = FactoredPoly::one();
            for &(r, m) in &den.roots {
                let keep = if (r - t.pole).norm() <= 1e-12 * (1.0 + r.norm()) {
                    m - (j + 1)
                } else {
                    m
                };
                if keep > 0 {
                    rest.roots.push((r, keep));
                }
            }
            num = num.add(&rest.expand().scale(c));
        }
    }
    RationalFunction::new(num, den_poly)
}

/// Inverse Fourier transform of a sum of pole terms at time `t`
/// (e^{−iΩt} convention), in closed form by residues.
///
/// Lower-half poles contribute only for t > 0, upper-half only for t < 0.
pub fn pole_terms_inverse_ft(terms: &[PoleTerm], t: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::default();
    for term in terms {
        let contributes = (t > 0.0 && term.pole.im < 0.0) || (t < 0.0 && term.pole.im > 0.0);
        if !contributes {
            continue;
        }
        // residue of e^{−iΩt}·c/(Ω−p)^{j+1} is c·(−it)^j e^{−ipt}/j!
        let phase = (-i * term.pole * t).exp();
        let mut fac = 1.0;
        let mut pw = Complex64::new(1.0, 0.0);
        for (j, &c) in term.coeffs.iter().enumerate() {
            if j > 0 {
                fac *= j as f64;
                pw *= -i * t;
            }
            acc += c * pw * phase / fac;
        }
    }
    // closing below (t > 0) runs clockwise: the 1/2π leaves ∓i Σres
    let sign = if t > 0.0 { -1.0 } else { 1.0 };
    acc * i * sign
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rf(num: &[f64], den: &[f64]) -> RationalFunction {
        RationalFunction::new(Polynomial::from_real(num), Polynomial::from_real(den)).unwrap()
    }

    #[test]
    fn constant_psd() {
        let pair = spectral_factorize(&rf(&[4.0], &[1.0])).unwrap();
        assert!((pair.s_plus.eval_real(3.0) - c(2.0, 0.0)).norm() < 1e-12);
        assert!((pair.s_minus.eval_real(3.0) - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn lorentzian_numerator() {
        // Ω² + 1 → s⁺ = Ω + i (zero at −i), s⁻ = Ω − i
        let pair = spectral_factorize(&rf(&[1.0, 0.0, 1.0], &[1.0])).unwrap();
        let z = pair.s_plus.zeros().unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0].0 - c(0.0, -1.0)).norm() < 1e-10);
        let w = 0.83;
        let prod = pair.s_plus.eval_real(w) * pair.s_minus.eval_real(w);
        assert!((prod - c(w * w + 1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn negative_spectrum_rejected() {
        // Ω² − 1 is negative inside |Ω| < 1
        assert!(matches!(
            spectral_factorize(&rf(&[-1.0, 0.0, 1.0], &[1.0])),
            Err(Error::NotAPsd(_))
        ));
    }

    #[test]
    fn whiten_flattens() {
        let psd = rf(&[1.0, 0.0, 1.0], &[4.0, 0.0, 1.0]);
        let w = whiten(&psd).unwrap();
        for k in 0..60 {
            let omega = 10f64.powf(-3.0 + 6.0 * k as f64 / 59.0);
            let flat = w.eval_real(omega).norm_sqr() * psd.eval_real(omega).re;
            assert!((flat - 1.0).abs() < 1e-9, "flat = {flat} at {omega}");
        }
    }

    #[test]
    fn causal_part_keeps_lower_pole() {
        let den = Polynomial::from_roots(c(1.0, 0.0), &[(c(0.0, -1.0), 1)]);
        let f = RationalFunction::new(Polynomial::one(), den).unwrap();
        let g = causal_part(&f).unwrap();
        let x = c(0.4, 0.0);
        assert!((g.eval(x) - f.eval(x)).norm() < 1e-12);
    }

    #[test]
    fn causal_part_drops_upper_pole() {
        let den = Polynomial::from_roots(c(1.0, 0.0), &[(c(0.0, 1.0), 1)]);
        let f = RationalFunction::new(Polynomial::one(), den).unwrap();
        let g = causal_part(&f).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn causal_part_mixed_poles() {
        // 1/((Ω−i)(Ω+2i)) → (i/3)/(Ω+2i)
        let den = Polynomial::from_roots(c(1.0, 0.0), &[(c(0.0, 1.0), 1), (c(0.0, -2.0), 1)]);
        let f = RationalFunction::new(Polynomial::one(), den).unwrap();
        let g = causal_part(&f).unwrap();
        let poles = g.poles().unwrap();
        assert_eq!(poles.len(), 1);
        assert!((poles[0].0 - c(0.0, -2.0)).norm() < 1e-10);
        let x = c(1.3, 0.0);
        let expect = c(0.0, 1.0 / 3.0) / (x + c(0.0, 2.0));
        assert!((g.eval(x) - expect).norm() < 1e-12);
    }

    #[test]
    fn improper_projection_rejected() {
        let f = rf(&[1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]);
        assert!(matches!(causal_part(&f), Err(Error::AmbiguousProjection(_))));
    }

    #[test]
    fn marginal_free_mass_zeros() {
        // S ∝ (Ω⁴ + q₂²)/Ω⁴: s⁺ zeros are (±√q₂ − i√q₂)/√2
        let q2 = (2.0 * std::f64::consts::PI * 150.0_f64).powi(2);
        let psd = rf(&[q2 * q2, 0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 0.0, 1.0]);
        let pair = spectral_factorize(&psd).unwrap();
        let zeros = pair.s_plus.zeros().unwrap();
        let s = q2.sqrt() / 2f64.sqrt();
        assert!(zeros.iter().any(|(z, _)| (z - c(s, -s)).norm() < 1e-6 * s));
        assert!(zeros.iter().any(|(z, _)| (z - c(-s, -s)).norm() < 1e-6 * s));
        // poles of s⁺ sit just below the axis at the displaced origin
        let poles = pair.s_plus.poles().unwrap();
        assert_eq!(poles.iter().map(|(_, m)| m).sum::<usize>(), 2);
        for (p, _) in poles {
            assert!(p.im < 0.0, "pole {p} not strictly lower");
        }
    }

    #[test]
    fn inverse_ft_of_causal_lorentzian() {
        // [1/(Ω+iγ)]: K(t) = −i e^{−γt} for t > 0, 0 for t < 0
        let terms = vec![PoleTerm {
            pole: c(0.0, -0.5),
            coeffs: vec![c(1.0, 0.0)],
        }];
        let v = pole_terms_inverse_ft(&terms, 2.0);
        let expect = c(0.0, -1.0) * (-0.5 * 2.0_f64).exp();
        assert!((v - expect).norm() < 1e-14);
        assert_eq!(pole_terms_inverse_ft(&terms, -2.0), Complex64::default());
    }
}
