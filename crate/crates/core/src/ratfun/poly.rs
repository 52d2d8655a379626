//! Dense complex polynomials in the sideband frequency Ω.

use num_complex::Complex64;

/// A polynomial with complex coefficients, stored in ascending degree.
///
/// Exactly-zero leading coefficients are trimmed; the zero polynomial is
/// the empty vector. Coefficients of SI-frequency polynomials legitimately
/// span many decades (∝ scale^degree), so magnitude-relative trimming is
/// never applied implicitly — see [`Polynomial::trim_relative_at_scale`]
/// for the explicit, scale-aware variant used after cancelling
/// subtractions.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming
    /// exactly-zero leading terms.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// Monic linear factor Ω − r.
    pub fn linear_from_root(r: Complex64) -> Self {
        Self::new(vec![-r, Complex64::new(1.0, 0.0)])
    }

    /// lead · Π_k (Ω − r_k), multiplicities honored.
    pub fn from_roots(lead: Complex64, roots: &[(Complex64, usize)]) -> Self {
        let mut p = Self::constant(lead);
        for &(r, m) in roots {
            let f = Self::linear_from_root(r);
            for _ in 0..m {
                p = p.mul(&f);
            }
        }
        p
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn trim(&mut self) {
        while let Some(c) = self.coeffs.last() {
            if c.norm() == 0.0 {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    /// Drops leading coefficients that are negligible at the scale of the
    /// remaining polynomial. The remainder's own characteristic scale is
    /// used, so a rounding-level leading coefficient cannot defend itself
    /// with the huge spurious root it would imply.
    pub fn trim_junk_leading(&self, tol: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        loop {
            if coeffs.len() <= 1 {
                break;
            }
            let rest = Polynomial::new(coeffs[..coeffs.len() - 1].to_vec());
            if rest.is_zero() {
                break;
            }
            let s = rest.characteristic_scale().max(1e-300);
            let mut weight = 1.0;
            let mut peak = 0.0f64;
            for c in rest.coeffs() {
                peak = peak.max(c.norm() * weight);
                weight *= s;
            }
            // weight is now s^n, the lead term magnitude at the rest scale
            let lead_at_scale = coeffs.last().unwrap().norm() * weight;
            if lead_at_scale <= tol * peak {
                coeffs.pop();
            } else {
                break;
            }
        }
        Polynomial::new(coeffs)
    }

    /// Zeroes interior coefficients that are negligible at the polynomial's
    /// own characteristic scale, restoring the exact sparsity (e.g. the Ω^k
    /// factors of marginal responses) that stepwise deflation smears out.
    pub fn clean_tiny_coefficients(&self, tol: f64) -> Self {
        if self.coeffs.len() <= 1 {
            return self.clone();
        }
        let s = self.characteristic_scale().max(1e-300);
        let mut weight = 1.0;
        let mut weighted: Vec<f64> = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            weighted.push(c.norm() * weight);
            weight *= s;
        }
        let peak = weighted.iter().fold(0.0f64, |a, &b| a.max(b));
        if peak == 0.0 {
            return self.clone();
        }
        Polynomial::new(
            self.coeffs
                .iter()
                .zip(&weighted)
                .map(|(&c, &w)| {
                    if w <= tol * peak {
                        Complex64::default()
                    } else {
                        c
                    }
                })
                .collect(),
        )
    }

    /// Drops leading coefficients that are negligible at the given frequency
    /// scale: |c_n|·s^n ≤ tol · max_k |c_k|·s^k. Used to strip the noise
    /// degrees left behind by cancelling subtractions.
    pub fn trim_relative_at_scale(&self, scale: f64, tol: f64) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut weight = 1.0;
        let mut magnitudes = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            magnitudes.push(c.norm() * weight);
            weight *= scale;
        }
        let peak = magnitudes.iter().fold(0.0f64, |a, &b| a.max(b));
        if peak == 0.0 {
            return Polynomial::zero();
        }
        let mut keep = self.coeffs.len();
        while keep > 0 && magnitudes[keep - 1] <= tol * peak {
            keep -= 1;
        }
        Polynomial::new(self.coeffs[..keep].to_vec())
    }

    /// Horner evaluation.
    pub fn eval(&self, omega: Complex64) -> Complex64 {
        let mut acc = Complex64::default();
        for &c in self.coeffs.iter().rev() {
            acc = acc * omega + c;
        }
        acc
    }

    /// Evaluates p and p' in one Horner pass.
    pub fn eval_with_derivative(&self, omega: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::default();
        let mut dp = Complex64::default();
        for &c in self.coeffs.iter().rev() {
            dp = dp * omega + p;
            p = p * omega + c;
        }
        (p, dp)
    }

    /// Scale-aware magnitude Σ|c_k||Ω|^k, used for backward-error tests.
    pub fn eval_magnitude(&self, omega: Complex64) -> f64 {
        let r = omega.norm();
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * r + c.norm();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::default(); n];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.coeff(k) + other.coeff(k);
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::default(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Multiplication by Ω^k.
    pub fn mul_omega_pow(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex64::default(); k];
        out.extend_from_slice(&self.coeffs);
        Self::new(out)
    }

    /// Euclidean division: self = q·div + r with deg r < deg div.
    pub fn div_rem(&self, div: &Self) -> (Self, Self) {
        assert!(!div.is_zero(), "division by zero polynomial");
        if self.degree() < div.degree() || self.is_zero() {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dn = div.coeffs.len();
        let lead = div.leading();
        let qn = rem.len() - dn + 1;
        let mut quot = vec![Complex64::default(); qn];
        for k in (0..qn).rev() {
            let q = rem[k + dn - 1] / lead;
            quot[k] = q;
            for j in 0..dn {
                rem[k + j] -= q * div.coeffs[j];
            }
        }
        rem.truncate(dn - 1);
        (Self::new(quot), Self::new(rem))
    }

    /// Removes a known root: returns q with p = (Ω − r)·q, discarding the
    /// residual. Small roots deflate by the forward recurrence, large roots
    /// by the backward recurrence starting at the constant term, which
    /// keeps exact low-order sparsity intact.
    pub fn deflate_root(&self, r: Complex64) -> Self {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        // a nonzero root cannot live in an exact Ω^z factor; splitting it
        // off keeps that sparsity exact through the division
        let zeros = self
            .coeffs
            .iter()
            .take_while(|c| **c == Complex64::default())
            .count();
        if zeros > 0 && r != Complex64::default() {
            let stripped = Polynomial::new(self.coeffs[zeros..].to_vec());
            return stripped.deflate_root(r).mul_omega_pow(zeros);
        }
        let n = self.coeffs.len();
        // forward division propagates error downward, backward upward; use
        // backward whenever the root is among the largest so that small
        // (marginal) coefficients keep their relative accuracy
        if r.norm() < 0.3 * self.characteristic_scale() {
            return self.div_rem(&Self::linear_from_root(r)).0;
        }
        let mut b = vec![Complex64::default(); n - 1];
        // a₀ = −r·b₀, a_k = b_{k−1} − r·b_k
        b[0] = -self.coeffs[0] / r;
        for k in 1..n - 1 {
            b[k] = (b[k - 1] - self.coeffs[k]) / r;
        }
        Polynomial::new(b)
    }

    /// Coefficient-wise conjugation; realizes Ω ↦ [p(Ω*)]*.
    pub fn conj_reflect(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// p(sΩ) as a polynomial in Ω.
    pub fn rescale_variable(&self, s: f64) -> Self {
        let mut pow = 1.0;
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| {
                    let out = c * pow;
                    pow *= s;
                    out
                })
                .collect(),
        )
    }

    /// Characteristic root-magnitude scale max_k |c_k / c_n|^{1/(n−k)}.
    ///
    /// Used to nondimensionalize before root finding; 1.0 for constants.
    pub fn characteristic_scale(&self) -> f64 {
        let n = self.degree();
        if n == 0 || self.is_zero() {
            return 1.0;
        }
        let lead = self.leading().norm();
        let mut s: f64 = 0.0;
        for (k, c) in self.coeffs.iter().enumerate().take(n) {
            let m = c.norm();
            if m > 0.0 {
                s = s.max((m / lead).powf(1.0 / (n - k) as f64));
            }
        }
        if s > 0.0 && s.is_finite() {
            s
        } else {
            1.0
        }
    }

    /// Taylor coefficients of p(p0 + δ) in δ up to order `order` (inclusive),
    /// via repeated synthetic division.
    pub fn taylor_at(&self, p0: Complex64, order: usize) -> Vec<Complex64> {
        let mut work = self.coeffs.clone();
        let mut out = Vec::with_capacity(order + 1);
        for _ in 0..=order {
            if work.is_empty() {
                out.push(Complex64::default());
                continue;
            }
            // synthetic division by (Ω − p0): remainder is the next Taylor coeff
            let mut acc = Complex64::default();
            for c in work.iter_mut().rev() {
                acc = acc * p0 + *c;
                *c = acc;
            }
            let rem = work.remove(0);
            out.push(rem);
        }
        out
    }
}
