//! Scalar figures of merit on Gaussian states: uncertainty product,
//! effective occupation number, entropy, and logarithmic negativity.

use crate::error::{Error, Result};
use crate::linalg;
use crate::HBAR;

/// Second-order moments of one mechanical mode, SI units.
#[derive(Debug, Clone, Copy)]
pub struct SingleModeState {
    /// Position variance, m².
    pub v_xx: f64,
    /// Momentum variance, (kg·m/s)².
    pub v_pp: f64,
    /// Symmetrized cross moment, J·s compatible.
    pub v_xp: f64,
    /// Mass, kg.
    pub mass: f64,
}

impl SingleModeState {
    pub fn new(v_xx: f64, v_pp: f64, v_xp: f64, mass: f64) -> Result<Self> {
        if !(v_xx > 0.0 && v_pp > 0.0) {
            return Err(Error::domain("variances must be positive"));
        }
        let det = v_xx * v_pp - v_xp * v_xp;
        if det < HBAR * HBAR / 4.0 * (1.0 - 1e-9) {
            return Err(Error::domain(format!(
                "uncertainty product below the Heisenberg bound: det V = {det:.6e}"
            )));
        }
        Ok(SingleModeState {
            v_xx,
            v_pp,
            v_xp,
            mass,
        })
    }

    pub fn det(&self) -> f64 {
        self.v_xx * self.v_pp - self.v_xp * self.v_xp
    }
}

/// U = (2/ħ)√(det V); unity for a pure state.
pub fn uncertainty_product(s: &SingleModeState) -> f64 {
    2.0 / HBAR * s.det().sqrt()
}

/// Effective occupation number, effective eigenfrequency, and von Neumann
/// entropy of a single-mode Gaussian state.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveOccupation {
    /// (U − 1)/2.
    pub n_eff: f64,
    /// √(V_pp/(m²V_xx)), rad/s.
    pub omega_eff: f64,
    /// (N+1)ln(N+1) − N ln N, taken to 0 at N = 0.
    pub entropy: f64,
}

pub fn effective_occupation(s: &SingleModeState) -> EffectiveOccupation {
    let u = uncertainty_product(s);
    let n_eff = ((u - 1.0) / 2.0).max(0.0);
    let omega_eff = (s.v_pp / (s.mass * s.mass * s.v_xx)).sqrt();
    let entropy = if n_eff > 0.0 {
        (n_eff + 1.0) * (n_eff + 1.0).ln() - n_eff * n_eff.ln()
    } else {
        0.0
    };
    EffectiveOccupation {
        n_eff,
        omega_eff,
        entropy,
    }
}

/// Covariance of two modes in block form over (x₁, p₁, x₂, p₂).
#[derive(Debug, Clone, Copy)]
pub struct TwoModeState {
    /// First-mode block [[V_xx, V_xp], [V_xp, V_pp]].
    pub v_ee: [[f64; 2]; 2],
    /// Second-mode block.
    pub v_nn: [[f64; 2]; 2],
    /// Cross block.
    pub v_en: [[f64; 2]; 2],
}

impl TwoModeState {
    pub fn matrix(&self) -> [f64; 16] {
        let mut v = [0.0; 16];
        for i in 0..2 {
            for j in 0..2 {
                v[i * 4 + j] = self.v_ee[i][j];
                v[(i + 2) * 4 + (j + 2)] = self.v_nn[i][j];
                v[i * 4 + (j + 2)] = self.v_en[i][j];
                v[(i + 2) * 4 + j] = self.v_en[j][i];
            }
        }
        v
    }

    fn validate(&self) -> Result<()> {
        let v = self.matrix();
        let eig = linalg::symmetric_eigenvalues(&v, 4);
        let scale = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if eig[0] < -1e-9 * scale {
            return Err(Error::domain(
                "two-mode covariance is not positive semidefinite",
            ));
        }
        let nu = linalg::symplectic_eigenvalues(&v, 4)?;
        if nu[0] < HBAR / 2.0 * (1.0 - 1e-6) {
            return Err(Error::domain(format!(
                "two-mode state violates the Heisenberg bound: ν₋ = {:.6e}",
                nu[0]
            )));
        }
        Ok(())
    }
}

fn det2(b: &[[f64; 2]; 2]) -> f64 {
    b[0][0] * b[1][1] - b[0][1] * b[1][0]
}

/// Smallest partial-transpose symplectic eigenvalue
/// σ⁻ = √((Σ − √(Σ² − 4 det V))/2) with Σ = det V_nn + det V_ee − 2 det V_en.
///
/// The discriminant is clamped at zero to absorb roundoff.
pub fn ptranspose_min_eigenvalue(t: &TwoModeState) -> f64 {
    let sigma = det2(&t.v_nn) + det2(&t.v_ee) - 2.0 * det2(&t.v_en);
    let detv = linalg::determinant(&t.matrix(), 4);
    let disc = (sigma * sigma - 4.0 * detv).max(0.0);
    (0.5 * (sigma - disc.sqrt())).max(0.0).sqrt()
}

/// Independent route to σ⁻: symplectic spectrum of the partially transposed
/// covariance (p₂ → −p₂) via the characteristic polynomial and the library
/// root finder.
pub fn ptranspose_min_eigenvalue_direct(t: &TwoModeState) -> Result<f64> {
    let mut v = t.matrix();
    for k in 0..4 {
        v[3 * 4 + k] = -v[3 * 4 + k];
        v[k * 4 + 3] = -v[k * 4 + 3];
    }
    let nu = linalg::symplectic_eigenvalues(&v, 4)?;
    Ok(nu[0])
}

/// Logarithmic negativity E_N = max(0, −log₂(2σ⁻/ħ)).
///
/// Values below 1e-7 collapse to exactly zero: the discriminant of the
/// invariant formula cancels for (near-)separable states and leaves √eps
/// noise in σ⁻.
pub fn log_negativity(t: &TwoModeState) -> Result<f64> {
    t.validate()?;
    let sigma_minus = ptranspose_min_eigenvalue(t);
    if sigma_minus <= 0.0 {
        return Err(Error::domain("degenerate partial-transpose spectrum"));
    }
    let e_n = (-(2.0 * sigma_minus / HBAR).log2()).max(0.0);
    Ok(if e_n < 1e-7 { 0.0 } else { e_n })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vacuum(mass: f64, omega: f64) -> SingleModeState {
        SingleModeState::new(
            HBAR / (2.0 * mass * omega),
            HBAR * mass * omega / 2.0,
            0.0,
            mass,
        )
        .unwrap()
    }

    #[test]
    fn vacuum_is_pure() {
        let s = vacuum(1e-3, 2.0 * std::f64::consts::PI * 100.0);
        assert!((uncertainty_product(&s) - 1.0).abs() < 1e-12);
        let occ = effective_occupation(&s);
        assert_eq!(occ.n_eff, 0.0);
        assert_eq!(occ.entropy, 0.0);
    }

    #[test]
    fn conditional_ground_state_is_pure() {
        // V_xx·V_pp − V_xp² = ħ²/2 − ħ²/4 = ħ²/4 → U = 1
        let m = 10.0;
        let oq = 2.0 * std::f64::consts::PI * 100.0;
        let s = SingleModeState::new(
            HBAR / (2f64.sqrt() * m * oq),
            HBAR * m * oq / 2f64.sqrt(),
            HBAR / 2.0,
            m,
        )
        .unwrap();
        assert!((uncertainty_product(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn occupation_of_mixed_state() {
        // U = 2 → N_eff = 0.5
        let m = 1.0;
        let omega = 1.0;
        let s = SingleModeState::new(
            HBAR / (2.0 * m * omega) * 2.0,
            HBAR * m * omega / 2.0 * 2.0,
            0.0,
            m,
        )
        .unwrap();
        let occ = effective_occupation(&s);
        assert!((uncertainty_product(&s) - 2.0).abs() < 1e-12);
        assert!((occ.n_eff - 0.5).abs() < 1e-12);
        assert!((occ.omega_eff - omega).abs() < 1e-12);
    }

    #[test]
    fn product_state_not_entangled() {
        let a = HBAR / 2.0;
        let t = TwoModeState {
            v_ee: [[a, 0.0], [0.0, a]],
            v_nn: [[a, 0.0], [0.0, a]],
            v_en: [[0.0, 0.0], [0.0, 0.0]],
        };
        assert!((ptranspose_min_eigenvalue(&t) - HBAR / 2.0).abs() < 1e-12 * HBAR);
        assert_eq!(log_negativity(&t).unwrap(), 0.0);
    }

    #[test]
    fn squeezed_pair_negativity() {
        // oppositely squeezed pure modes overlapped: E_N = 2s/ln 2
        let s_par = 0.7_f64;
        let a = HBAR / 2.0;
        let (ep, em) = ((2.0 * s_par).exp(), (-2.0 * s_par).exp());
        let (vxxc, vxxd) = (a * em, a * ep);
        let (vppc, vppd) = (a * ep, a * em);
        let t = TwoModeState {
            v_ee: [[(vxxc + vxxd) / 4.0, 0.0], [0.0, vppc + vppd]],
            v_nn: [[(vxxc + vxxd) / 4.0, 0.0], [0.0, vppc + vppd]],
            v_en: [[(vxxc - vxxd) / 4.0, 0.0], [0.0, vppc - vppd]],
        };
        let en = log_negativity(&t).unwrap();
        let expect = 2.0 * s_par / std::f64::consts::LN_2;
        assert!(
            (en - expect).abs() < 1e-9 * expect,
            "E_N = {en}, expected {expect}"
        );
        // invariant-formula route agrees with the direct symplectic route
        let direct = ptranspose_min_eigenvalue_direct(&t).unwrap();
        let formula = ptranspose_min_eigenvalue(&t);
        assert!((direct - formula).abs() < 1e-9 * formula);
    }

    #[test]
    fn mode_units_mismatch_is_rescaled_by_blocks() {
        // the two-mode blocks here use unequal x scalings; E_N of a product
        // of (differently) pure modes is still zero
        let m = 5.0;
        let (w1, w2) = (300.0, 900.0);
        let s1 = vacuum(m, w1);
        let s2 = vacuum(m, w2);
        let t = TwoModeState {
            v_ee: [[s1.v_xx, s1.v_xp], [s1.v_xp, s1.v_pp]],
            v_nn: [[s2.v_xx, s2.v_xp], [s2.v_xp, s2.v_pp]],
            v_en: [[0.0, 0.0], [0.0, 0.0]],
        };
        assert_eq!(log_negativity(&t).unwrap(), 0.0);
    }

    #[test]
    fn separable_mixtures_have_zero_negativity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        let m = 1.0;
        for _ in 0..40 {
            // convex mixture of product states: separable by construction
            let mut acc_e = [[0.0; 2]; 2];
            let mut acc_n = [[0.0; 2]; 2];
            let k = rng.gen_range(2..5);
            let mut weights = vec![0.0; k];
            let mut tot = 0.0;
            for w in weights.iter_mut() {
                *w = rng.gen_range(0.1..1.0);
                tot += *w;
            }
            for w in weights.iter_mut() {
                *w /= tot;
            }
            for &w in &weights {
                let we = rng.gen_range(100.0..1000.0);
                let wn = rng.gen_range(100.0..1000.0);
                let heat = rng.gen_range(1.0..3.0);
                let se = vacuum(m, we);
                let sn = vacuum(m, wn);
                acc_e[0][0] += w * se.v_xx * heat;
                acc_e[1][1] += w * se.v_pp * heat;
                acc_n[0][0] += w * sn.v_xx * heat;
                acc_n[1][1] += w * sn.v_pp * heat;
            }
            let t = TwoModeState {
                v_ee: acc_e,
                v_nn: acc_n,
                v_en: [[0.0, 0.0], [0.0, 0.0]],
            };
            assert_eq!(log_negativity(&t).unwrap(), 0.0);
        }
    }

    #[test]
    fn symplectic_invariance_of_u() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..50 {
            let m = 2.5;
            let omega = 700.0;
            let base = vacuum(m, omega);
            let u0 = uncertainty_product(&base);
            // random symplectic: rotation · squeeze · rotation in natural units
            let (t1, r, t2) = (
                rng.gen_range(0.0..std::f64::consts::TAU),
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let sx = (HBAR / (2.0 * m * omega)).sqrt();
            let sp = (HBAR * m * omega / 2.0).sqrt();
            let rot = |t: f64| [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
            let sq = [[r.exp(), 0.0], [0.0, (-r).exp()]];
            let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
                let mut c = [[0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            c[i][j] += a[i][k] * b[k][j];
                        }
                    }
                }
                c
            };
            let sm = mul(mul(rot(t1), sq), rot(t2));
            let vn = [[base.v_xx / (sx * sx), 0.0], [0.0, base.v_pp / (sp * sp)]];
            let smt = [[sm[0][0], sm[1][0]], [sm[0][1], sm[1][1]]];
            let v2 = mul(mul(sm, vn), smt);
            let transformed = SingleModeState::new(
                v2[0][0] * sx * sx,
                v2[1][1] * sp * sp,
                v2[0][1] * sx * sp,
                m,
            )
            .unwrap();
            let u1 = uncertainty_product(&transformed);
            assert!((u1 - u0).abs() < 1e-9, "U changed: {u0} → {u1}");
        }
    }
}
