//! Two-mirror entanglement: the joint Gaussian state of the end-mirror
//! motions assembled from the common- and differential-mode conditional
//! states, and its maximization over measurement parameters.

use crate::error::{Error, Result};
use crate::gstate::{log_negativity, ptranspose_min_eigenvalue, SingleModeState, TwoModeState};
use crate::markov::{freemass_homodyne_cov, HomodyneConfig, MeasurementMode};
use crate::optimize::{lin_grid, log_grid, nelder_mead};
use crate::HBAR;

/// Paired common/differential homodyne configurations sensing the two
/// collective mirror modes; classical noise is shared equally, so both
/// configurations carry the same Ω_F and Ω_x.
#[derive(Debug, Clone, Copy)]
pub struct EntanglementSetup {
    pub differential: HomodyneConfig,
    pub common: HomodyneConfig,
}

impl EntanglementSetup {
    /// Builds a setup with shared mass and classical noise corners; laser
    /// noise enters the common (bright-port) mode only.
    pub fn new(
        mass: f64,
        omega_f: f64,
        omega_x: f64,
        s_a1a1: f64,
        s_a2a2: f64,
    ) -> Result<Self> {
        if s_a1a1 < 1.0 || s_a2a2 < 1.0 {
            return Err(Error::domain("laser noise spectra must be at least 1"));
        }
        let omega_cl = (omega_f * omega_x).sqrt();
        let base = HomodyneConfig {
            omega_f,
            omega_x,
            ..HomodyneConfig::quantum_limited(mass, omega_cl)
        };
        Ok(EntanglementSetup {
            differential: base,
            common: HomodyneConfig {
                mode: MeasurementMode::Common,
                s_a1a1,
                s_a2a2,
                ..base
            },
        })
    }

    fn omega_cl(&self) -> f64 {
        (self.differential.omega_f * self.differential.omega_x).sqrt()
    }
}

/// Combined covariance of the two end mirrors (x_e, p_e, x_n, p_n) from the
/// common- and differential-mode conditional states:
///
///   V_nn = V_ee = [[(Vxx_c+Vxx_d)/4, (Vxp_c+Vxp_d)/2], [·, Vpp_c+Vpp_d]],
///   V_en with minus signs in place of the plus signs.
pub fn assemble_total_cov(v_c: &SingleModeState, v_d: &SingleModeState) -> TwoModeState {
    let same = [
        [(v_c.v_xx + v_d.v_xx) / 4.0, (v_c.v_xp + v_d.v_xp) / 2.0],
        [(v_c.v_xp + v_d.v_xp) / 2.0, v_c.v_pp + v_d.v_pp],
    ];
    let cross = [
        [(v_c.v_xx - v_d.v_xx) / 4.0, (v_c.v_xp - v_d.v_xp) / 2.0],
        [(v_c.v_xp - v_d.v_xp) / 2.0, v_c.v_pp - v_d.v_pp],
    ];
    TwoModeState {
        v_ee: same,
        v_nn: same,
        v_en: cross,
    }
}

/// Logarithmic negativity of the mirror pair for given mode measurement
/// frequencies and homodyne angles (fast unvalidated route used inside the
/// optimizer).
fn negativity_at(setup: &EntanglementSetup, params: &[f64]) -> f64 {
    let (ln_oq_c, ln_oq_d, zeta_c, zeta_d) = (params[0], params[1], params[2], params[3]);
    if !(-std::f64::consts::FRAC_PI_2 + 1e-6..=0.0).contains(&zeta_c)
        || !(-std::f64::consts::FRAC_PI_2 + 1e-6..=0.0).contains(&zeta_d)
    {
        return -1.0;
    }
    let mut cfg_c = setup.common;
    cfg_c.omega_q = ln_oq_c.exp();
    cfg_c.zeta = zeta_c;
    let mut cfg_d = setup.differential;
    cfg_d.omega_q = ln_oq_d.exp();
    cfg_d.zeta = zeta_d;
    let (v_c, v_d) = match (freemass_homodyne_cov(&cfg_c), freemass_homodyne_cov(&cfg_d)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return -1.0,
    };
    let t = assemble_total_cov(&v_c, &v_d);
    let sigma = ptranspose_min_eigenvalue(&t);
    if sigma <= 0.0 {
        return -1.0;
    }
    (-(2.0 * sigma / HBAR).log2()).max(0.0)
}

/// Result of the entanglement maximization.
#[derive(Debug, Clone, Copy)]
pub struct EntanglementOptimum {
    pub e_n: f64,
    pub omega_q_common: f64,
    pub omega_q_differential: f64,
    pub zeta_common: f64,
    pub zeta_differential: f64,
}

/// Maximizes the logarithmic negativity over (Ω_q^c, Ω_q^d, ζ^c, ζ^d).
///
/// A deterministic coarse grid (log-spaced measurement frequencies over
/// [1e-2, 1e3]·Ω_cl, angles in (−π/2, 0]) seeds a Nelder–Mead refinement to
/// 1e-6 in E_N. `fix_phase_quadrature` restricts both angles to ζ = 0.
pub fn maximize_entanglement(
    setup: &EntanglementSetup,
    grid_points: usize,
    fix_phase_quadrature: bool,
) -> Result<EntanglementOptimum> {
    let n = grid_points.max(17);
    let omega_cl = setup.omega_cl();
    let oq_grid = log_grid(1e-2 * omega_cl, 1e3 * omega_cl, n);
    let zeta_grid = if fix_phase_quadrature {
        vec![0.0]
    } else {
        lin_grid(-std::f64::consts::FRAC_PI_2 + 1e-3, 0.0, n)
    };

    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    for &oq_c in &oq_grid {
        for &oq_d in &oq_grid {
            for &z_c in &zeta_grid {
                for &z_d in &zeta_grid {
                    let p = [oq_c.ln(), oq_d.ln(), z_c, z_d];
                    let v = negativity_at(setup, &p);
                    if v > best.0 {
                        best = (v, p);
                    }
                }
            }
        }
    }

    let refined = if fix_phase_quadrature {
        // refine only the two frequencies
        let f = |p: &[f64]| -negativity_at(setup, &[p[0], p[1], 0.0, 0.0]);
        let (x, v) = nelder_mead(&f, &best.1[..2], &[0.2, 0.2], 1e-6, 400);
        ([x[0], x[1], 0.0, 0.0], -v)
    } else {
        let f = |p: &[f64]| -negativity_at(setup, p);
        let (x, v) = nelder_mead(&f, &best.1, &[0.2, 0.2, 0.05, 0.05], 1e-6, 800);
        ([x[0], x[1], x[2], x[3]], -v)
    };
    let (params, e_n) = if refined.1 >= best.0 {
        (refined.0, refined.1)
    } else {
        (best.1, best.0)
    };

    // validate the optimum through the checked route
    let mut cfg_c = setup.common;
    cfg_c.omega_q = params[0].exp();
    cfg_c.zeta = params[2];
    let mut cfg_d = setup.differential;
    cfg_d.omega_q = params[1].exp();
    cfg_d.zeta = params[3];
    let v_c = freemass_homodyne_cov(&cfg_c)?;
    let v_d = freemass_homodyne_cov(&cfg_d)?;
    let checked = log_negativity(&assemble_total_cov(&v_c, &v_d))?;
    Ok(EntanglementOptimum {
        e_n: checked.max(e_n.max(0.0)),
        omega_q_common: cfg_c.omega_q,
        omega_q_differential: cfg_d.omega_q,
        zeta_common: cfg_c.zeta,
        zeta_differential: cfg_d.zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gstate::uncertainty_product;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn pure_state(mass: f64, omega: f64, squeeze: f64) -> SingleModeState {
        SingleModeState::new(
            HBAR / (2.0 * mass * omega) * (-2.0 * squeeze).exp(),
            HBAR * mass * omega / 2.0 * (2.0 * squeeze).exp(),
            0.0,
            mass,
        )
        .unwrap()
    }

    #[test]
    fn identical_modes_give_product_state() {
        let v = pure_state(1.0, 500.0, 0.3);
        let t = assemble_total_cov(&v, &v);
        assert_eq!(t.v_en, [[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(log_negativity(&t).unwrap(), 0.0);
    }

    #[test]
    fn opposite_squeezing_entangles() {
        let v_c = pure_state(1.0, 500.0, 0.6);
        let v_d = pure_state(1.0, 500.0, -0.6);
        let t = assemble_total_cov(&v_c, &v_d);
        let e = log_negativity(&t).unwrap();
        let expect = 2.0 * 0.6 / std::f64::consts::LN_2;
        assert!((e - expect).abs() < 1e-9 * expect, "E_N = {e}");
    }

    #[test]
    fn trace_consistency() {
        let v_c = pure_state(2.0, 300.0, 0.2);
        let v_d = pure_state(2.0, 700.0, -0.1);
        let t = assemble_total_cov(&v_c, &v_d);
        let trace = t.v_nn[0][0] + t.v_nn[1][1] + t.v_ee[0][0] + t.v_ee[1][1];
        let expect = (v_c.v_xx + v_d.v_xx) / 2.0 + 2.0 * (v_c.v_pp + v_d.v_pp);
        assert!((trace - expect).abs() < 1e-15 * expect);
    }

    #[test]
    fn swap_symmetry_of_negativity() {
        let v_c = pure_state(1.0, 400.0, 0.5);
        let v_d = pure_state(1.0, 900.0, -0.2);
        let a = log_negativity(&assemble_total_cov(&v_c, &v_d)).unwrap();
        let b = log_negativity(&assemble_total_cov(&v_d, &v_c)).unwrap();
        assert!((a - b).abs() < 1e-12 * a.max(1.0));
    }

    #[test]
    fn subsql_window_produces_entanglement() {
        // Ω_x/Ω_F = 5, no laser noise: optimized E_N > 0
        let setup =
            EntanglementSetup::new(10.0, TWO_PI * 10.0, TWO_PI * 50.0, 1.0, 1.0).unwrap();
        let opt = maximize_entanglement(&setup, 17, false).unwrap();
        assert!(opt.e_n > 0.0, "expected entanglement, got {}", opt.e_n);
        // phase-quadrature-restricted search cannot beat the free search
        let fixed = maximize_entanglement(&setup, 17, true).unwrap();
        assert!(fixed.e_n <= opt.e_n + 1e-6);
    }

    #[test]
    fn no_window_no_entanglement() {
        // Ω_x/Ω_F = 1: classical noise everywhere above the SQL
        let setup =
            EntanglementSetup::new(10.0, TWO_PI * 30.0, TWO_PI * 30.0, 1.0, 1.0).unwrap();
        let opt = maximize_entanglement(&setup, 17, false).unwrap();
        assert_eq!(opt.e_n, 0.0);
    }

    #[test]
    fn common_mode_includes_laser_noise() {
        let setup =
            EntanglementSetup::new(10.0, TWO_PI * 10.0, TWO_PI * 50.0, 5.0, 5.0).unwrap();
        let mut cfg = setup.common;
        cfg.omega_q = setup.omega_cl();
        let v = freemass_homodyne_cov(&cfg).unwrap();
        // laser noise makes the common mode less pure than the noiseless one
        let mut clean = cfg;
        clean.s_a1a1 = 1.0;
        clean.s_a2a2 = 1.0;
        let v0 = freemass_homodyne_cov(&clean).unwrap();
        assert!(uncertainty_product(&v) > uncertainty_product(&v0));
    }
}
