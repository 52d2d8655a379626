//! Markovian measurement models: white-noise spectra, closed-form
//! conditional covariances, homodyne readout and squeezed-input variants,
//! white classical-noise bookkeeping, and the quantum-limit filter kernels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gstate::SingleModeState;
use crate::ratfun::{Polynomial, RationalFunction};
use crate::wiener::SpectrumSet;
use crate::HBAR;

/// A continuous linear Markovian position measurement: white sensing noise
/// Ẑ, white back-action force F̂, and their (real) cross spectrum, acting on
/// a damped harmonic oscillator.
#[derive(Debug, Clone, Copy)]
pub struct MarkovModel {
    /// Reduced mass, kg.
    pub mass: f64,
    /// Mechanical eigenfrequency, rad/s.
    pub omega_m: f64,
    /// Mechanical damping rate, rad/s.
    pub gamma_m: f64,
    /// Sensing-noise PSD, m²·s.
    pub s_zz: f64,
    /// Force-noise PSD, N²·s.
    pub s_ff: f64,
    /// Cross spectrum, ħ-scaled (J·s).
    pub s_zf: f64,
}

impl MarkovModel {
    pub fn new(
        mass: f64,
        omega_m: f64,
        gamma_m: f64,
        s_zz: f64,
        s_ff: f64,
        s_zf: f64,
    ) -> Result<Self> {
        if mass <= 0.0 || s_zz < 0.0 || s_ff < 0.0 || omega_m < 0.0 || gamma_m < 0.0 {
            return Err(Error::domain("model parameters out of range"));
        }
        let model = MarkovModel {
            mass,
            omega_m,
            gamma_m,
            s_zz,
            s_ff,
            s_zf,
        };
        if model.purity() < 1.0 - 1e-9 {
            return Err(Error::domain(format!(
                "measurement purity μ = {:.6} below the Heisenberg bound",
                model.purity()
            )));
        }
        Ok(model)
    }

    /// Quantum-limited model (μ = 1, no cross correlation) at measurement
    /// frequency Ω_q.
    pub fn quantum_limited(mass: f64, omega_q: f64) -> Self {
        MarkovModel {
            mass,
            omega_m: 0.0,
            gamma_m: 0.0,
            s_zz: HBAR / (mass * omega_q * omega_q),
            s_ff: HBAR * mass * omega_q * omega_q,
            s_zf: 0.0,
        }
    }

    /// Builds the free-mass model realizing given (q₁, q₂, μ).
    pub fn from_q_parameters(q1: f64, q2: f64, mu: f64, mass: f64) -> Result<Self> {
        if q2 <= 0.0 || q1.abs() >= q2 || mu < 1.0 {
            return Err(Error::domain(
                "need q₂ > 0, |q₁| < q₂ and μ ≥ 1 for a free-mass realization",
            ));
        }
        let s_zz = HBAR * mu.sqrt() / (mass * (q2 * q2 - q1 * q1).sqrt());
        let s_zf = q1 * mass * s_zz;
        let s_ff = q2 * q2 * mass * mass * s_zz;
        MarkovModel::new(mass, 0.0, 0.0, s_zz, s_ff, s_zf)
    }

    /// Measurement purity μ = (S_ZZ S_FF − S_ZF²)/ħ².
    pub fn purity(&self) -> f64 {
        (self.s_zz * self.s_ff - self.s_zf * self.s_zf) / (HBAR * HBAR)
    }

    /// q₁ = ω_m² + S_ZF/(m S_ZZ).
    pub fn q1(&self) -> f64 {
        self.omega_m * self.omega_m + self.s_zf / (self.mass * self.s_zz)
    }

    /// q₂ = √(ω_m⁴ + 2ω_m² S_ZF/(m S_ZZ) + S_FF/(m² S_ZZ)); always positive.
    pub fn q2(&self) -> f64 {
        let w2 = self.omega_m * self.omega_m;
        (w2 * w2
            + 2.0 * w2 * self.s_zf / (self.mass * self.s_zz)
            + self.s_ff / (self.mass * self.mass * self.s_zz))
            .sqrt()
    }

    /// Measurement frequency Ω_q = (S_FF/(m² S_ZZ))^{1/4}.
    pub fn omega_q(&self) -> f64 {
        (self.s_ff / (self.mass * self.mass * self.s_zz)).powf(0.25)
    }

    /// Mechanical response R_xx(Ω) = −1/(m(Ω² + iγ_mΩ − ω_m²)).
    pub fn response(&self) -> RationalFunction {
        let den = Polynomial::new(vec![
            Complex64::new(-self.omega_m * self.omega_m, 0.0),
            Complex64::new(0.0, self.gamma_m),
            Complex64::new(1.0, 0.0),
        ]);
        RationalFunction::new(
            Polynomial::constant(Complex64::new(-1.0 / self.mass, 0.0)),
            den,
        )
        .expect("nonzero denominator")
    }

    /// Applies the damping floor γ_m ≥ floor_rel·√q₂ used by the generic
    /// pipeline on marginally stable models.
    pub fn with_damping_floor(&self, floor_rel: f64) -> Self {
        let mut out = *self;
        out.gamma_m = out.gamma_m.max(floor_rel * out.q2().sqrt());
        out
    }
}

/// White-noise output/cross/auto spectra of the model over the (x, p)
/// observables: S_yy = S_ZZ + 2Re[R]S_ZF + |R|²S_FF and companions, with
/// the momentum rows generated by p̂ = −i m Ω x̂.
pub fn markov_spectra(model: &MarkovModel) -> Result<SpectrumSet> {
    let r = model.response();
    let rr = r.reflect();
    let r_sum = r.add(&rr)?;
    let r_sq = r.mul(&rr)?;

    let s_zz = RationalFunction::constant_real(model.s_zz);
    let s_yy = s_zz
        .add(&r_sum.scale(Complex64::new(model.s_zf, 0.0)))?
        .add(&r_sq.scale(Complex64::new(model.s_ff, 0.0)))?;
    let s_xy = r
        .scale(Complex64::new(model.s_zf, 0.0))
        .add(&r_sq.scale(Complex64::new(model.s_ff, 0.0)))?;
    let s_xx = r_sq.scale(Complex64::new(model.s_ff, 0.0));

    SpectrumSet::position_momentum(s_yy, s_xy, s_xx, model.mass)
}

/// Closed-form conditional covariance of the lossless (γ_m → 0) oscillator
/// under the Markovian measurement:
///
///   V = √μ · D · [[√(2q₂/(q₁+q₂)), √((q₂−q₁)/(q₂+q₁))], [·, ·]] · Dᵀ,
///   D = diag(√(ħ/(2m√q₂)), √(ħm√q₂/2)),
///
/// with det V = μħ²/4 exactly.
pub fn conditional_cov_markov(model: &MarkovModel) -> Result<SingleModeState> {
    let q1 = model.q1();
    let q2 = model.q2();
    let mu = model.purity();
    if mu < 1.0 - 1e-9 {
        return Err(Error::domain("μ < 1 is unphysical"));
    }
    if (q2 - q1).abs() <= f64::EPSILON * q2.abs() {
        return Err(Error::domain(
            "q₁ = q₂ is forbidden by the Heisenberg uncertainty principle",
        ));
    }
    let sqrt_mu = mu.sqrt();
    let sq2 = q2.sqrt();
    let dx = HBAR / (2.0 * model.mass * sq2);
    let dp = HBAR * model.mass * sq2 / 2.0;
    let diag = (2.0 * q2 / (q1 + q2)).sqrt();
    let off = ((q2 - q1) / (q2 + q1)).sqrt();
    SingleModeState::new(
        sqrt_mu * dx * diag,
        sqrt_mu * dp * diag,
        sqrt_mu * HBAR / 2.0 * off,
        model.mass,
    )
}

/// Which interferometer mode a homodyne configuration describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementMode {
    /// Dark-port readout; vacuum input.
    Differential,
    /// Bright-port readout; technical laser noise and enhanced coupling.
    Common,
}

/// Free-mass homodyne measurement configuration with white classical noise
/// and optional input squeezing.
#[derive(Debug, Clone, Copy)]
pub struct HomodyneConfig {
    /// Homodyne angle, rad; 0 reads the phase quadrature.
    pub zeta: f64,
    /// Measurement frequency, rad/s.
    pub omega_q: f64,
    /// Classical force-noise corner Ω_F, rad/s (0 disables).
    pub omega_f: f64,
    /// Classical sensing-noise corner Ω_x, rad/s (∞ disables).
    pub omega_x: f64,
    /// Input squeeze factor r ≥ 0.
    pub r_op: f64,
    /// Squeeze angle, rad.
    pub phi_op: f64,
    /// Laser amplitude-noise spectrum (≥ 1), common mode only.
    pub s_a1a1: f64,
    /// Laser phase-noise spectrum (≥ 1), common mode only.
    pub s_a2a2: f64,
    pub mode: MeasurementMode,
    /// Common-mode coupling enhancement 2/τ ≥ 1, scaling Ω_q.
    pub alpha_ratio: f64,
    /// Reduced mass, kg.
    pub mass: f64,
}

impl HomodyneConfig {
    /// Quantum-limited differential configuration at phase quadrature.
    pub fn quantum_limited(mass: f64, omega_q: f64) -> Self {
        HomodyneConfig {
            zeta: 0.0,
            omega_q,
            omega_f: 0.0,
            omega_x: f64::INFINITY,
            r_op: 0.0,
            phi_op: 0.0,
            s_a1a1: 1.0,
            s_a2a2: 1.0,
            mode: MeasurementMode::Differential,
            alpha_ratio: 1.0,
            mass,
        }
    }

    /// Ω_q including the common-mode coupling enhancement.
    pub fn effective_omega_q(&self) -> f64 {
        match self.mode {
            MeasurementMode::Differential => self.omega_q,
            MeasurementMode::Common => self.alpha_ratio * self.omega_q,
        }
    }

    /// ξ_F = Ω_F/Ω_q.
    pub fn xi_f(&self) -> f64 {
        self.omega_f / self.effective_omega_q()
    }

    /// ξ_x = Ω_q/Ω_x.
    pub fn xi_x(&self) -> f64 {
        if self.omega_x.is_infinite() {
            0.0
        } else {
            self.effective_omega_q() / self.omega_x
        }
    }

    fn laser_spectra(&self) -> (f64, f64) {
        match self.mode {
            MeasurementMode::Differential => (1.0, 1.0),
            MeasurementMode::Common => (self.s_a1a1, self.s_a2a2),
        }
    }

    /// Equivalent white-noise model: S_ZZ = (ħ²/α²)(S_a₂ + S_a₁tan²ζ) +
    /// 2ħ/(mΩ_x²), S_FF = S_a₁α² + 2ħmΩ_F², S_ZF = ħ S_a₁ tan ζ, with
    /// α² = ħ m Ω_q².
    pub fn to_markov_model(&self) -> Result<MarkovModel> {
        if self.r_op != 0.0 {
            return Err(Error::domain(
                "white-noise equivalent only defined for coherent input",
            ));
        }
        let oq = self.effective_omega_q();
        let (sa1, sa2) = self.laser_spectra();
        let t = self.zeta.tan();
        if !t.is_finite() {
            return Err(Error::domain("homodyne angle ζ = ±π/2 carries no signal"));
        }
        let alpha2 = HBAR * self.mass * oq * oq;
        let s_zz_cl = if self.omega_x.is_infinite() {
            0.0
        } else {
            2.0 * HBAR / (self.mass * self.omega_x * self.omega_x)
        };
        let s_zz = HBAR * HBAR / alpha2 * (sa2 + sa1 * t * t) + s_zz_cl;
        let s_ff = sa1 * alpha2 + 2.0 * HBAR * self.mass * self.omega_f * self.omega_f;
        let s_zf = HBAR * sa1 * t;
        MarkovModel::new(self.mass, 0.0, 0.0, s_zz, s_ff, s_zf)
    }
}

/// Free-mass conditional covariance under balanced homodyne readout with
/// white classical noise (coherent input):
///
///   V_xx = ħ/(√2 mΩ_q)·√B·(√(AB) − S_a₁ tan ζ)^{1/2},
///   V_pp = ħmΩ_q/√2·√A·(√(AB) − S_a₁ tan ζ)^{1/2},
///   V_xp = ħ/2·(√(AB) − S_a₁ tan ζ),
///
/// with A = S_a₁ + 2ξ_F² and B = S_a₂ + S_a₁ tan²ζ + 2ξ_x²; the laser-noise
/// spectra S_a enter the common mode only and reduce to 1 otherwise.
pub fn freemass_homodyne_cov(cfg: &HomodyneConfig) -> Result<SingleModeState> {
    if cfg.r_op != 0.0 {
        return Err(Error::domain(
            "use squeezed_input_cov for squeezed-vacuum input",
        ));
    }
    let t = cfg.zeta.tan();
    if !t.is_finite() || cfg.zeta.cos().abs() < 1e-12 {
        return Err(Error::domain(
            "homodyne angle ζ = ±π/2 reads pure amplitude and carries no position signal",
        ));
    }
    let (sa1, sa2) = cfg.laser_spectra();
    let oq = cfg.effective_omega_q();
    let (xi_f, xi_x) = (cfg.xi_f(), cfg.xi_x());
    let a = sa1 + 2.0 * xi_f * xi_f;
    let b = sa2 + sa1 * t * t + 2.0 * xi_x * xi_x;
    let root = (a * b).sqrt();
    let core = root - sa1 * t;
    SingleModeState::new(
        HBAR / (2f64.sqrt() * cfg.mass * oq) * b.sqrt() * core.sqrt(),
        HBAR * cfg.mass * oq / 2f64.sqrt() * a.sqrt() * core.sqrt(),
        HBAR / 2.0 * core,
        cfg.mass,
    )
}

/// Free-mass conditional covariance with squeezed-vacuum input at phase
/// quadrature readout, with λ±² = cosh 2r ± cos 2φ sinh 2r:
///
///   V_xx = ħ/(√2 mΩ_q)·√(λ₋²+2ξ_x²)·(√((λ₊²+2ξ_F²)(λ₋²+2ξ_x²)) − sin 2φ sinh 2r)^{1/2},
///
/// and the momentum/cross companions.
pub fn squeezed_input_cov(cfg: &HomodyneConfig) -> Result<SingleModeState> {
    if cfg.mode == MeasurementMode::Common {
        return Err(Error::domain(
            "squeezed input is modeled at the dark port only",
        ));
    }
    let (r2, p2) = (2.0 * cfg.r_op, 2.0 * cfg.phi_op);
    let lambda_p2 = r2.cosh() + p2.cos() * r2.sinh();
    let lambda_m2 = r2.cosh() - p2.cos() * r2.sinh();
    let s2 = p2.sin() * r2.sinh();
    let oq = cfg.omega_q;
    let (xi_f, xi_x) = (cfg.omega_f / oq, if cfg.omega_x.is_infinite() {
        0.0
    } else {
        oq / cfg.omega_x
    });
    let lp = lambda_p2 + 2.0 * xi_f * xi_f;
    let lm = lambda_m2 + 2.0 * xi_x * xi_x;
    let core = (lp * lm).sqrt() - s2;
    SingleModeState::new(
        HBAR / (2f64.sqrt() * cfg.mass * oq) * lm.sqrt() * core.sqrt(),
        HBAR * cfg.mass * oq / 2f64.sqrt() * lp.sqrt() * core.sqrt(),
        HBAR / 2.0 * core,
        cfg.mass,
    )
}

/// White classical-noise budget summary relative to the free-mass standard
/// quantum limit S_SQL = 2ħ/(mΩ²).
#[derive(Debug, Clone, Copy)]
pub struct ClassicalNoiseModel {
    /// S_FF^cl = 2ħmΩ_F², N²·s.
    pub s_ff_cl: f64,
    /// S_ZZ^cl = 2ħ/(mΩ_x²), m²·s.
    pub s_zz_cl: f64,
    /// Ω_cl = √(Ω_F Ω_x), where the classical noise is furthest below SQL.
    pub omega_cl: f64,
    /// min_Ω S_cl/S_SQL = 2Ω_F/Ω_x.
    pub beating: f64,
    /// U ≈ 1 + beating at the optimal measurement frequency.
    pub u_approx: f64,
    /// N_eff ≈ beating/2.
    pub n_eff_approx: f64,
    /// A sub-SQL window exists iff Ω_x/Ω_F > 2.
    pub sub_sql_window: bool,
}

pub fn classical_noise_model(omega_f: f64, omega_x: f64, mass: f64) -> Result<ClassicalNoiseModel> {
    if omega_f <= 0.0 || omega_x <= 0.0 || mass <= 0.0 {
        return Err(Error::domain("classical noise corners must be positive"));
    }
    let beating = 2.0 * omega_f / omega_x;
    Ok(ClassicalNoiseModel {
        s_ff_cl: 2.0 * HBAR * mass * omega_f * omega_f,
        s_zz_cl: 2.0 * HBAR / (mass * omega_x * omega_x),
        omega_cl: (omega_f * omega_x).sqrt(),
        beating,
        u_approx: 1.0 + beating,
        n_eff_approx: beating / 2.0,
        sub_sql_window: omega_x / omega_f > 2.0,
    })
}

/// Time-domain Wiener kernels of the quantum-limited free mass at phase
/// quadrature: decaying cosines at the measurement frequency.
#[derive(Debug, Clone, Copy)]
pub struct QuantumLimitKernels {
    pub omega_q: f64,
    pub mass: f64,
}

impl QuantumLimitKernels {
    pub fn new(omega_q: f64, mass: f64) -> Self {
        QuantumLimitKernels { omega_q, mass }
    }

    /// K_x(t) = √2 Ω_q e^{−Ω_q t/√2} cos(Ω_q t/√2).
    pub fn position(&self, t: f64) -> f64 {
        let a = self.omega_q / 2f64.sqrt();
        2f64.sqrt() * self.omega_q * (-a * t).exp() * (a * t).cos()
    }

    /// K_p(t) = √2 m Ω_q² e^{−Ω_q t/√2} cos(Ω_q t/√2 + π/4).
    pub fn momentum(&self, t: f64) -> f64 {
        let a = self.omega_q / 2f64.sqrt();
        2f64.sqrt()
            * self.mass
            * self.omega_q
            * self.omega_q
            * (-a * t).exp()
            * (a * t + std::f64::consts::FRAC_PI_4).cos()
    }
}
