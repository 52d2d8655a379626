//! Factored polynomial and rational forms used inside the conditioning
//! pipeline.
//!
//! Denominators are carried as root multisets so that shared physical
//! factors cancel by multiset difference instead of coefficient arithmetic,
//! which keeps marginally-stable (near-real-pole) models numerically exact.

use num_complex::Complex64;

use super::poly::Polynomial;
use super::rational::RationalFunction;
use crate::error::{Error, Result};
use crate::ROOT_CLUSTER_REL;

/// lead · Π_k (Ω − r_k)^{m_k} with the roots kept explicit.
#[derive(Debug, Clone)]
pub struct FactoredPoly {
    pub lead: Complex64,
    pub roots: Vec<(Complex64, usize)>,
}

impl FactoredPoly {
    pub fn one() -> Self {
        FactoredPoly {
            lead: Complex64::new(1.0, 0.0),
            roots: Vec::new(),
        }
    }

    pub fn from_roots(lead: Complex64, roots: Vec<(Complex64, usize)>) -> Self {
        FactoredPoly { lead, roots }
    }

    pub fn degree(&self) -> usize {
        self.roots.iter().map(|&(_, m)| m).sum()
    }

    pub fn eval(&self, omega: Complex64) -> Complex64 {
        let mut acc = self.lead;
        for &(r, m) in &self.roots {
            let f = omega - r;
            for _ in 0..m {
                acc *= f;
            }
        }
        acc
    }

    pub fn expand(&self) -> Polynomial {
        Polynomial::from_roots(self.lead, &self.roots)
    }

    pub fn conj_reflect(&self) -> Self {
        FactoredPoly {
            lead: self.lead.conj(),
            roots: self.roots.iter().map(|&(r, m)| (r.conj(), m)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.lead *= other.lead;
        for &(r, m) in &other.roots {
            out.add_root(r, m);
        }
        out
    }

    pub fn characteristic_scale(&self) -> f64 {
        let s = self.roots.iter().map(|(r, _)| r.norm()).fold(0.0, f64::max);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    fn matching_tol(a: Complex64, b: Complex64, floor: f64) -> f64 {
        (ROOT_CLUSTER_REL * a.norm().max(b.norm())).max(floor)
    }

    /// Adds a root, merging with an existing one when within tolerance.
    /// `floor` is the absolute merge distance (typically 1e-12 of the
    /// frequency scale of the surrounding computation).
    pub fn add_root_tol(&mut self, r: Complex64, mult: usize, floor: f64) {
        for entry in self.roots.iter_mut() {
            if (entry.0 - r).norm() <= Self::matching_tol(entry.0, r, floor) {
                entry.1 += mult;
                return;
            }
        }
        self.roots.push((r, mult));
    }

    pub fn add_root(&mut self, r: Complex64, mult: usize) {
        let floor = 1e-9 * self.characteristic_scale();
        self.add_root_tol(r, mult, floor);
    }

    /// Multiset least common multiple of root lists (max multiplicity per
    /// matched root). Leads multiply.
    pub fn lcm(&self, other: &Self, floor: f64) -> Self {
        let mut out = self.clone();
        out.lead = self.lead * other.lead;
        'outer: for &(r, m) in &other.roots {
            for entry in out.roots.iter_mut() {
                if (entry.0 - r).norm() <= Self::matching_tol(entry.0, r, floor) {
                    entry.1 = entry.1.max(m);
                    continue 'outer;
                }
            }
            out.roots.push((r, m));
        }
        out
    }

    /// Multiset difference self ∖ other; errors if `other` is not contained.
    pub fn difference(&self, other: &Self, floor: f64) -> Result<Self> {
        let mut out = self.clone();
        out.lead = self.lead / other.lead;
        for &(r, m) in &other.roots {
            let mut remaining = m;
            for entry in out.roots.iter_mut() {
                if (entry.0 - r).norm() <= Self::matching_tol(entry.0, r, floor) {
                    let take = remaining.min(entry.1);
                    entry.1 -= take;
                    remaining -= take;
                    if remaining == 0 {
                        break;
                    }
                }
            }
            if remaining > 0 {
                return Err(Error::Numerical(format!(
                    "factored difference: root {r} (×{m}) not contained"
                )));
            }
        }
        out.roots.retain(|&(_, m)| m > 0);
        Ok(out)
    }

    /// Re-merges root entries that landed at coincident positions through
    /// independent bookkeeping paths.
    pub fn merged(&self) -> Self {
        let floor = 1e-11 * self.characteristic_scale();
        let mut out = FactoredPoly {
            lead: self.lead,
            roots: Vec::new(),
        };
        for &(r, m) in &self.roots {
            out.add_root_tol(r, m, floor);
        }
        out
    }

    /// Splits into (lower half-plane, upper half-plane) parts. Roots within
    /// `band` of the real axis go to whichever side their sign hints at;
    /// exactly-real roots are rejected.
    pub fn split_half_planes(&self) -> Result<(Self, Self)> {
        let band = 1e-12 * self.characteristic_scale();
        let mut lower = FactoredPoly::one();
        let mut upper = FactoredPoly::one();
        for &(r, m) in &self.roots {
            if r.im < -band {
                lower.roots.push((r, m));
            } else if r.im > band {
                upper.roots.push((r, m));
            } else {
                return Err(Error::domain(format!(
                    "real-axis root {r} cannot be assigned a half-plane"
                )));
            }
        }
        Ok((lower, upper))
    }
}

/// num(Ω) / den with the denominator factored.
#[derive(Debug, Clone)]
pub struct FactoredRatio {
    pub num: Polynomial,
    pub den: FactoredPoly,
}

impl FactoredRatio {
    pub fn eval(&self, omega: Complex64) -> Complex64 {
        self.num.eval(omega) / self.den.eval(omega)
    }

    pub fn strictly_proper_by(&self, gap: usize) -> bool {
        self.num.is_zero() || self.num.degree() + gap <= self.den.degree()
    }
}

/// A single partial-fraction pole group Σ_j coeffs[j] / (Ω − pole)^{j+1}.
#[derive(Debug, Clone)]
pub struct PoleTerm {
    pub pole: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl PoleTerm {
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, omega: Complex64) -> Complex64 {
        let inv = (omega - self.pole).inv();
        let mut acc = Complex64::default();
        let mut pow = inv;
        for &c in &self.coeffs {
            acc += c * pow;
            pow *= inv;
        }
        acc
    }

    /// Coefficient-conjugated reflection; maps the pole across the real axis.
    pub fn conj_reflect(&self) -> Self {
        PoleTerm {
            pole: self.pole.conj(),
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }
}

/// Evaluates a sum of pole terms.
pub fn eval_pole_terms(terms: &[PoleTerm], omega: Complex64) -> Complex64 {
    terms.iter().map(|t| t.eval(omega)).sum()
}

/// Partial fractions of a strictly proper factored ratio.
///
/// Residues (including higher-order coefficients) come from the Taylor
/// series of the numerator and of the deflated denominator at each pole.
pub fn pole_terms(ratio: &FactoredRatio) -> Result<Vec<PoleTerm>> {
    if !ratio.strictly_proper_by(1) {
        return Err(Error::AmbiguousProjection(
            "partial fractions of a non-vanishing function at infinity".into(),
        ));
    }
    let mut out = Vec::new();
    if ratio.num.is_zero() {
        return Ok(out);
    }
    let ratio = &FactoredRatio {
        num: ratio.num.clone(),
        den: ratio.den.merged(),
    };
    for (k, &(pole, mult)) in ratio.den.roots.iter().enumerate() {
        // numerator Taylor series at the pole
        let num_series = ratio.num.taylor_at(pole, mult - 1);
        // deflated denominator series: lead · Π_{j≠k} ((pole − r_j) + δ)^{m_j}
        let mut den_series = vec![Complex64::default(); mult];
        den_series[0] = ratio.den.lead;
        for (j, &(r, m)) in ratio.den.roots.iter().enumerate() {
            if j == k {
                continue;
            }
            for _ in 0..m {
                series_mul_linear(&mut den_series, pole - r);
            }
        }
        let coeffs_low = series_div(&num_series, &den_series)?;
        // f = Σ_i c_i δ^{i−mult}: coefficient of 1/(Ω−p)^{mult−i} is c_i
        let mut coeffs = vec![Complex64::default(); mult];
        for (i, &c) in coeffs_low.iter().enumerate() {
            coeffs[mult - 1 - i] = c;
        }
        out.push(PoleTerm { pole, coeffs });
    }
    Ok(out)
}

/// In-place multiply of a truncated series by (a + δ).
fn series_mul_linear(series: &mut [Complex64], a: Complex64) {
    let n = series.len();
    for i in (0..n).rev() {
        let shifted = if i > 0 { series[i - 1] } else { Complex64::default() };
        series[i] = series[i] * a + shifted;
    }
}

/// Truncated series division a(δ)/b(δ) to the length of `a`.
fn series_div(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let b0 = b[0];
    if b0.norm() == 0.0 {
        return Err(Error::Numerical(
            "series division by vanishing leading coefficient".into(),
        ));
    }
    let n = a.len();
    let mut c = vec![Complex64::default(); n];
    for k in 0..n {
        let mut acc = a[k];
        for j in 0..k {
            acc -= c[j] * b.get(k - j).copied().unwrap_or_default();
        }
        c[k] = acc / b0;
    }
    Ok(c)
}

/// Residue of f at each of its poles located strictly in the upper half
/// plane, where f is given by a numerator polynomial over a factored
/// denominator. The residues feed ∫f dΩ = 2πi Σ Res.
pub fn upper_half_residue_sum(ratio: &FactoredRatio) -> Result<Complex64> {
    let scale = ratio.den.characteristic_scale();
    let band = 1e-12 * scale;
    let mut sum = Complex64::default();
    let ratio = &FactoredRatio {
        num: ratio.num.clone(),
        den: ratio.den.merged(),
    };
    for (k, &(pole, mult)) in ratio.den.roots.iter().enumerate() {
        if pole.im <= band {
            if pole.im >= -band {
                // real-axis pole: only acceptable if the numerator kills it
                let nval = ratio.num.eval(pole).norm();
                let nmag = ratio.num.eval_magnitude(pole).max(1e-300);
                if nval > 1e-7 * nmag {
                    return Err(Error::DivergentMoments(format!(
                        "integrand has a real-axis pole at |Ω| = {:.3e}",
                        pole.norm()
                    )));
                }
            }
            continue;
        }
        let num_series = ratio.num.taylor_at(pole, mult - 1);
        let mut den_series = vec![Complex64::default(); mult];
        den_series[0] = ratio.den.lead;
        for (j, &(r, m)) in ratio.den.roots.iter().enumerate() {
            if j == k {
                continue;
            }
            for _ in 0..m {
                series_mul_linear(&mut den_series, pole - r);
            }
        }
        let c = series_div(&num_series, &den_series)?;
        sum += c[mult - 1];
    }
    Ok(sum)
}

/// Residue sum over the upper-half poles of the product
/// (Σ upper terms)(Σ lower terms): the closed form for the conditioning
/// correction integrals.
pub fn cross_residue_sum(upper: &[PoleTerm], lower: &[PoleTerm]) -> Complex64 {
    let mut sum = Complex64::default();
    for t in upper {
        // Res_p [ Σ_a α_a/(Ω−p)^a · G(Ω) ] = Σ_a α_a G^{(a−1)}(p)/(a−1)!
        for (a_idx, &alpha) in t.coeffs.iter().enumerate() {
            let order = a_idx; // derivative order = a − 1
            if alpha == Complex64::default() {
                continue;
            }
            let mut g_deriv = Complex64::default();
            for lt in lower {
                for (l_idx, &beta) in lt.coeffs.iter().enumerate() {
                    if beta == Complex64::default() {
                        continue;
                    }
                    let l = (l_idx + 1) as i32;
                    // d^order/dΩ^order (Ω−q)^{−l} = (−1)^order l(l+1)…(l+order−1) (Ω−q)^{−l−order}
                    let mut fac = 1.0;
                    for d in 0..order {
                        fac *= (l + d as i32) as f64;
                    }
                    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                    let base = (t.pole - lt.pole).powi(-(l + order as i32));
                    g_deriv += beta * sign * fac * base;
                }
            }
            let mut factorial = 1.0;
            for d in 1..=order {
                factorial *= d as f64;
            }
            sum += alpha * g_deriv / factorial;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pole_terms_simple_pair() {
        // 1/((Ω−i)(Ω+2i)) = (−i/3)/(Ω−i) + (i/3)/(Ω+2i)
        let den = FactoredPoly::from_roots(
            c(1.0, 0.0),
            vec![(c(0.0, 1.0), 1), (c(0.0, -2.0), 1)],
        );
        let terms = pole_terms(&FactoredRatio {
            num: Polynomial::one(),
            den,
        })
        .unwrap();
        for t in &terms {
            if (t.pole - c(0.0, 1.0)).norm() < 1e-12 {
                assert!((t.coeffs[0] - c(0.0, -1.0 / 3.0)).norm() < 1e-12);
            } else {
                assert!((t.coeffs[0] - c(0.0, 1.0 / 3.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pole_terms_double_pole() {
        // (Ω+1)/((Ω−i)²): series at i: num = (i+1) + δ; coeffs: 1/(Ω−i): 1, 1/(Ω−i)²: i+1
        let den = FactoredPoly::from_roots(c(1.0, 0.0), vec![(c(0.0, 1.0), 2)]);
        let terms = pole_terms(&FactoredRatio {
            num: Polynomial::from_real(&[1.0, 1.0]),
            den,
        })
        .unwrap();
        assert_eq!(terms.len(), 1);
        assert!((terms[0].coeffs[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((terms[0].coeffs[1] - c(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn residue_integral_lorentzian() {
        // ∫ dΩ/(Ω²+1) = π: residue at +i is 1/(2i), 2πi·(1/2i) = π
        let den = FactoredPoly::from_roots(
            c(1.0, 0.0),
            vec![(c(0.0, 1.0), 1), (c(0.0, -1.0), 1)],
        );
        let s = upper_half_residue_sum(&FactoredRatio {
            num: Polynomial::one(),
            den,
        })
        .unwrap();
        let integral = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * s;
        assert!((integral - c(std::f64::consts::PI, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cross_residue_matches_direct() {
        // f = 1/(Ω−2i), g = 1/(Ω+i): ∫fg dΩ = 2πi·Res_{2i} = 2πi/(2i+i) = 2π/3
        let upper = vec![PoleTerm {
            pole: c(0.0, 2.0),
            coeffs: vec![c(1.0, 0.0)],
        }];
        let lower = vec![PoleTerm {
            pole: c(0.0, -1.0),
            coeffs: vec![c(1.0, 0.0)],
        }];
        let s = cross_residue_sum(&upper, &lower);
        assert!((s - c(1.0, 0.0) / c(0.0, 3.0)).norm() < 1e-14);
    }
}

/// Rational function with an exactly factored denominator, used by model
/// builders so that shared physical factors stay identical across spectra.
#[derive(Debug, Clone)]
pub struct FactoredRational {
    pub num: Polynomial,
    pub den: FactoredPoly,
}

impl FactoredRational {
    pub fn constant(c: Complex64) -> Self {
        FactoredRational {
            num: Polynomial::constant(c),
            den: FactoredPoly::one(),
        }
    }

    pub fn zero() -> Self {
        FactoredRational {
            num: Polynomial::zero(),
            den: FactoredPoly::one(),
        }
    }

    pub fn new(num: Polynomial, den: FactoredPoly) -> Self {
        FactoredRational { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FactoredRational {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        FactoredRational {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn div_factored(&self, den: &FactoredPoly) -> Self {
        FactoredRational {
            num: self.num.clone(),
            den: self.den.mul(den),
        }
    }

    pub fn reflect(&self) -> Self {
        FactoredRational {
            num: self.num.conj_reflect(),
            den: self.den.conj_reflect(),
        }
    }

    pub fn sub(&self, other: &Self) -> crate::Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn add(&self, other: &Self) -> crate::Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        let common = self.den.lcm(&other.den, 0.0);
        let lift_a = common.difference(&self.den, 0.0)?;
        let lift_b = common.difference(&other.den, 0.0)?;
        let num = self
            .num
            .mul(&lift_a.expand())
            .add(&other.num.mul(&lift_b.expand()));
        Ok(FactoredRational { num, den: common })
    }

    /// Folds the denominator lead into the numerator, leaving the factored
    /// denominator monic.
    pub fn monic_den(&self) -> Self {
        let lead = self.den.lead;
        FactoredRational {
            num: self.num.scale(lead.inv()),
            den: FactoredPoly {
                lead: Complex64::new(1.0, 0.0),
                roots: self.den.roots.clone(),
            },
        }
    }

    /// Cancels denominator factors at which the numerator provably
    /// vanishes. Positions are exact (no root finding), so the deflations
    /// are backward stable.
    pub fn reduced(&self) -> Self {
        let mut num = self.num.clone();
        let mut den = FactoredPoly {
            lead: self.den.lead,
            roots: Vec::new(),
        };
        for &(r, m) in &self.den.roots {
            let mut remaining = m;
            while remaining > 0 && num.degree() >= 1 {
                let val = num.eval(r).norm();
                let mag = num.eval_magnitude(r).max(1e-300);
                if val > 1e-10 * mag {
                    break;
                }
                num = num.deflate_root(r);
                remaining -= 1;
            }
            if remaining > 0 {
                den.roots.push((r, remaining));
            }
        }
        FactoredRational { num, den }
    }

    /// Expands into a plain rational function without re-reduction.
    pub fn to_rational(&self) -> crate::Result<RationalFunction> {
        RationalFunction::from_parts_unreduced(self.num.clone(), self.den.expand())
    }
}
