//! Independent discrete-time Riccati/Kalman oracle for Markovian models.
//!
//! The two-state (x, p) model is decorrelated from the measurement noise,
//! discretized exactly with a Van Loan matrix exponential, and iterated to
//! its steady state. The route shares no code with the contour-integration
//! pipeline, so agreement between the two is a genuine cross-check.

use crate::error::{Error, Result};
use crate::markov::MarkovModel;
use crate::wiener::{CovarianceMatrix, ObservableInfo};

type M2 = [[f64; 2]; 2];

fn m2_mul(a: &M2, b: &M2) -> M2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn m2_t(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn m2_add(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

/// exp(M) for 4×4 by scaling-and-squaring with a Taylor series.
fn expm4(m: &[f64; 16]) -> [f64; 16] {
    let norm: f64 = m.iter().map(|x| x.abs()).fold(0.0, f64::max) * 4.0;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings as i32);
    let a: Vec<f64> = m.iter().map(|x| x * scale).collect();

    let mut result = [0.0; 16];
    for i in 0..4 {
        result[i * 4 + i] = 1.0;
    }
    let mut term = result;
    for k in 1..=16 {
        let mut next = [0.0; 16];
        for i in 0..4 {
            for l in 0..4 {
                let t = term[i * 4 + l];
                if t == 0.0 {
                    continue;
                }
                for j in 0..4 {
                    next[i * 4 + j] += t * a[l * 4 + j];
                }
            }
        }
        for (r, n) in next.iter_mut().enumerate() {
            *n /= k as f64;
            result[r] += *n;
        }
        term = next;
    }
    let mut out = result;
    for _ in 0..squarings {
        let mut sq = [0.0; 16];
        for i in 0..4 {
            for l in 0..4 {
                let t = out[i * 4 + l];
                if t == 0.0 {
                    continue;
                }
                for j in 0..4 {
                    sq[i * 4 + j] += t * out[l * 4 + j];
                }
            }
        }
        out = sq;
    }
    out
}

/// One-step discrete Kalman filter equivalent to the continuous model
/// sampled at `dt`, with the measurement noise averaged over the step.
///
/// The sensing/back-action cross spectrum makes the step's process noise
/// and the step-averaged measurement noise correlated at order one,
/// E[w_k v̄_k] = (S_ZF/2dt)·∫₀^dt e^{Aσ}B dσ, so the recursion runs in
/// predictor form with the explicit cross term.
#[derive(Debug, Clone)]
pub struct RiccatiFilter {
    a_d: M2,
    q_d: M2,
    r_d: f64,
    m_d: [f64; 2],
    /// Current one-step prediction covariance.
    pub cov: M2,
}

impl RiccatiFilter {
    pub fn new(model: &MarkovModel, dt: f64) -> Result<Self> {
        if model.s_zz <= 0.0 {
            return Err(Error::domain("oracle needs nonzero sensing noise"));
        }
        let omega_char = model.q2().sqrt();
        if dt > 0.01 / omega_char {
            return Err(Error::domain(format!(
                "dt = {dt:.3e} too coarse; need dt ≤ {:.3e}",
                0.01 / omega_char
            )));
        }
        let m = model.mass;
        // two-sided white-noise intensities (single-sided S/2)
        let q_int = model.s_ff / 2.0;
        let r_int = model.s_zz / 2.0;
        let s_int = model.s_zf / 2.0;
        let a = [
            [0.0, 1.0 / m],
            [-m * model.omega_m * model.omega_m, -model.gamma_m],
        ];

        // Van Loan: exp([[-A, Q],[0, Aᵀ]]dt) → A_d = F₂₂ᵀ, Q_d = F₂₂ᵀ F₁₂
        let mut vl = [0.0; 16];
        for i in 0..2 {
            for j in 0..2 {
                vl[i * 4 + j] = -a[i][j] * dt;
                vl[(i + 2) * 4 + (j + 2)] = a[j][i] * dt;
            }
        }
        vl[1 * 4 + 3] = q_int * dt; // Q = [[0,0],[0,q_int]]
        let phi = expm4(&vl);
        let f22 = [[phi[10], phi[11]], [phi[14], phi[15]]];
        let f12 = [[phi[2], phi[3]], [phi[6], phi[7]]];
        let a_d = m2_t(&f22);
        let q_d = m2_mul(&a_d, &f12);
        let q_d = [
            [q_d[0][0], 0.5 * (q_d[0][1] + q_d[1][0])],
            [0.5 * (q_d[0][1] + q_d[1][0]), q_d[1][1]],
        ];

        // Φ₁ = ∫₀^dt e^{Aσ}B dσ via the augmented exponential
        let mut aug = [0.0; 16];
        for i in 0..2 {
            for j in 0..2 {
                aug[i * 4 + j] = a[i][j] * dt;
            }
        }
        aug[2] = 0.0; // B = (0, 1)ᵀ column at index 2
        aug[1 * 4 + 2] = dt;
        let phi_b = expm4(&aug);
        let m_d = [phi_b[2] * s_int / dt, phi_b[6] * s_int / dt];

        // huge prior so the steady state is approached from above
        let x_scale = (model.s_zz * omega_char).max(1e-30);
        let p_scale = (m * omega_char).powi(2) * x_scale;
        Ok(RiccatiFilter {
            a_d,
            q_d,
            r_d: r_int / dt,
            m_d,
            cov: [[1e12 * x_scale, 0.0], [0.0, 1e12 * p_scale]],
        })
    }

    /// One predictor-form Riccati step; returns the relative covariance
    /// change.
    pub fn step(&mut self) -> f64 {
        let p = &self.cov;
        let s = p[0][0] + self.r_d;
        // gain on the prediction: K_p = (A P Cᵀ + M)/s
        let apc = [
            self.a_d[0][0] * p[0][0] + self.a_d[0][1] * p[1][0],
            self.a_d[1][0] * p[0][0] + self.a_d[1][1] * p[1][0],
        ];
        let k = [
            (apc[0] + self.m_d[0]) / s,
            (apc[1] + self.m_d[1]) / s,
        ];
        let apa = m2_mul(&m2_mul(&self.a_d, p), &m2_t(&self.a_d));
        let mut p_new = m2_add(&apa, &self.q_d);
        for i in 0..2 {
            for j in 0..2 {
                p_new[i][j] -= k[i] * s * k[j];
            }
        }
        let sym = 0.5 * (p_new[0][1] + p_new[1][0]);
        p_new[0][1] = sym;
        p_new[1][0] = sym;
        let scale = p_new[0][0].abs() + p_new[1][1].abs();
        let delta = ((p_new[0][0] - self.cov[0][0]).abs()
            + (p_new[1][1] - self.cov[1][1]).abs()
            + 2.0 * (p_new[0][1] - self.cov[0][1]).abs())
            / scale.max(1e-300);
        self.cov = p_new;
        delta
    }

    /// Filtered covariance: the prediction conditioned on the current
    /// measurement.
    pub fn filtered(&self) -> M2 {
        let p = &self.cov;
        let s = p[0][0] + self.r_d;
        let pc = [p[0][0], p[1][0]];
        let mut out = *p;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] -= pc[i] * pc[j] / s;
            }
        }
        out
    }
}

/// Steady-state covariance of the sampled Kalman filter at step `dt`,
/// iterated until successive covariances differ by less than 1e-13
/// (relative) or `horizon` steps elapse.
pub fn riccati_oracle(model: &MarkovModel, dt: f64, horizon: usize) -> Result<CovarianceMatrix> {
    let mut filter = RiccatiFilter::new(model, dt)?;
    let mut converged = false;
    for _ in 0..horizon {
        if filter.step() < 1e-13 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoSteadyState(format!(
            "no convergence within {horizon} steps of dt = {dt:.3e}; \
             the model may be marginally stable"
        )));
    }
    let c = filter.filtered();
    Ok(CovarianceMatrix::from_rows(
        vec![c[0][0], c[0][1], c[1][0], c[1][1]],
        vec![
            ObservableInfo::new("x", "m"),
            ObservableInfo::new("p", "kg m/s"),
        ],
    ))
}

/// Richardson extrapolation of the oracle in dt: runs at dt and dt/2 and
/// removes the leading O(dt) sampling bias.
pub fn riccati_oracle_extrapolated(
    model: &MarkovModel,
    dt: f64,
    horizon: usize,
) -> Result<CovarianceMatrix> {
    let coarse = riccati_oracle(model, dt, horizon)?;
    let fine = riccati_oracle(model, dt / 2.0, horizon * 2)?;
    let data: Vec<f64> = fine
        .rows()
        .iter()
        .zip(coarse.rows())
        .map(|(f, c)| 2.0 * f - c)
        .collect();
    Ok(CovarianceMatrix::from_rows(data, coarse.observables.clone()))
}




/// exp(M) for a dense n×n matrix by scaling and squaring with a Taylor
/// series; sized for the small state spaces used here.
pub(crate) fn expm_n(m: &[f64], n: usize) -> Vec<f64> {
    let norm: f64 = m.iter().map(|x| x.abs()).fold(0.0, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings as i32);
    let a: Vec<f64> = m.iter().map(|x| x * scale).collect();
    let mut result = vec![0.0; n * n];
    for i in 0..n {
        result[i * n + i] = 1.0;
    }
    let mut term = result.clone();
    for k in 1..=20 {
        let next = crate::linalg::mat_mul(&term, &a, n);
        term = next.iter().map(|x| x / k as f64).collect();
        for (r, t) in result.iter_mut().zip(&term) {
            *r += t;
        }
    }
    let mut out = result;
    for _ in 0..squarings {
        out = crate::linalg::mat_mul(&out, &out, n);
    }
    out
}

/// Steady-state filtered covariance of a sampled linear-Gaussian model
///
///   ẋ = A x + B w,  y = C x + v,
///
/// with white noise intensities E[w wᵀ] = Q_w δ, E[v v] = r_v δ and
/// cross-correlation E[B w·v] = s_xv δ, iterated in predictor form.
pub struct SampledKalman {
    n: usize,
    a_d: Vec<f64>,
    q_d: Vec<f64>,
    m_d: Vec<f64>,
    c: Vec<f64>,
    r_d: f64,
    /// Current prediction covariance.
    pub cov: Vec<f64>,
}

impl SampledKalman {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        a: &[f64],
        noise_cols: &[(Vec<f64>, f64)], // (column of B, intensity) per channel
        c: &[f64],
        r_v: f64,
        cross: &[f64], // E[(Bw)(v)] column, length n
        dt: f64,
        prior_scale: &[f64],
    ) -> Self {
        // Van Loan for A_d, Q_d
        let two = 2 * n;
        let mut vl = vec![0.0; two * two];
        for i in 0..n {
            for j in 0..n {
                vl[i * two + j] = -a[i * n + j] * dt;
                vl[(i + n) * two + (j + n)] = a[j * n + i] * dt;
            }
        }
        let mut q = vec![0.0; n * n];
        for (col, intensity) in noise_cols {
            for i in 0..n {
                for j in 0..n {
                    q[i * n + j] += col[i] * col[j] * intensity;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                vl[i * two + (j + n)] = q[i * n + j] * dt;
            }
        }
        let phi = expm_n(&vl, two);
        let mut a_d = vec![0.0; n * n];
        let mut f12 = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a_d[i * n + j] = phi[(j + n) * two + (i + n)];
                f12[i * n + j] = phi[i * two + (j + n)];
            }
        }
        let q_d_raw = crate::linalg::mat_mul(&a_d, &f12, n);
        let mut q_d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                q_d[i * n + j] = 0.5 * (q_d_raw[i * n + j] + q_d_raw[j * n + i]);
            }
        }
        // M_d = (1/dt)·∫e^{Aσ}dσ·cross ≈ cross + A·cross·dt/2
        let mut m_d = cross.to_vec();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += a[i * n + j] * cross[j];
            }
            m_d[i] += 0.5 * dt * acc;
        }
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            cov[i * n + i] = 1e10 * prior_scale[i] * prior_scale[i];
        }
        SampledKalman {
            n,
            a_d,
            q_d,
            m_d,
            c: c.to_vec(),
            r_d: r_v / dt,
            cov,
        }
    }

    /// One predictor step; returns the relative change.
    pub fn step(&mut self) -> f64 {
        let n = self.n;
        let p = &self.cov;
        // s = CPCᵀ + R
        let mut cp = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                cp[i] += p[i * n + j] * self.c[j];
            }
        }
        let mut s = self.r_d;
        for i in 0..n {
            s += self.c[i] * cp[i];
        }
        // K = (A P Cᵀ + M)/s
        let mut apc = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                apc[i] += self.a_d[i * n + j] * cp[j];
            }
        }
        let k: Vec<f64> = apc
            .iter()
            .zip(&self.m_d)
            .map(|(a, m)| (a + m) / s)
            .collect();
        let apa = crate::linalg::mat_mul(
            &crate::linalg::mat_mul(&self.a_d, p, n),
            &transpose(&self.a_d, n),
            n,
        );
        let mut p_new = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                p_new[i * n + j] = apa[i * n + j] + self.q_d[i * n + j] - k[i] * s * k[j];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let sym = 0.5 * (p_new[i * n + j] + p_new[j * n + i]);
                p_new[i * n + j] = sym;
                p_new[j * n + i] = sym;
            }
        }
        let mut delta = 0.0;
        let mut scale = 1e-300;
        for i in 0..n {
            scale += p_new[i * n + i].abs();
            delta += (p_new[i * n + i] - p[i * n + i]).abs();
        }
        self.cov = p_new;
        delta / scale
    }

    /// Jumps to the steady state by doubling and stores it as the current
    /// prediction covariance.
    pub fn converge_doubling(&mut self) -> Result<()> {
        self.cov = dare_doubling(self.n, &self.a_d, &self.q_d, &self.c, self.r_d, &self.m_d)?;
        Ok(())
    }

    /// Filtered covariance given the current measurement.
    pub fn filtered(&self) -> Vec<f64> {
        let n = self.n;
        let p = &self.cov;
        let mut cp = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                cp[i] += p[i * n + j] * self.c[j];
            }
        }
        let mut s = self.r_d;
        for i in 0..n {
            s += self.c[i] * cp[i];
        }
        let mut out = p.clone();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] -= cp[i] * cp[j] / s;
            }
        }
        out
    }
}

fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[i * n + j] = a[j * n + i];
        }
    }
    t
}

/// Steady-state solution of the predictor-form discrete Riccati equation
///
///   P⁺ = A P Aᵀ + Q − (A P Cᵀ + M)(C P Cᵀ + R)⁻¹(A P Cᵀ + M)ᵀ
///
/// by the structured doubling algorithm; converges quadratically, so long
/// transients of slow modes cost log instead of linear time.
pub fn dare_doubling(
    n: usize,
    a_d: &[f64],
    q_d: &[f64],
    c: &[f64],
    r_d: f64,
    m_d: &[f64],
) -> Result<Vec<f64>> {
    // eliminate the cross term: Ã = A − M R⁻¹ C, Q̃ = Q − M R⁻¹ Mᵀ
    let mut a_t = a_d.to_vec();
    let mut q_t = q_d.to_vec();
    for i in 0..n {
        for j in 0..n {
            a_t[i * n + j] -= m_d[i] * c[j] / r_d;
            q_t[i * n + j] -= m_d[i] * m_d[j] / r_d;
        }
    }
    // filter-DARE ↦ control-DARE duality: run the structured doubling
    // algorithm with A ↦ Ãᵀ, G₀ = CᵀR⁻¹C, H₀ = Q̃; H converges to P
    //   A_{k+1} = A_k (I + G_k H_k)⁻¹ A_k
    //   G_{k+1} = G_k + A_k (I + G_k H_k)⁻¹ G_k A_kᵀ
    //   H_{k+1} = H_k + A_kᵀ H_k (I + G_k H_k)⁻¹ A_k
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = c[i] * c[j] / r_d;
        }
    }
    let mut h = q_t.clone();
    let mut a_k = transpose(&a_t, n);
    for _ in 0..200 {
        let gh = crate::linalg::mat_mul(&g, &h, n);
        let mut s_m = gh;
        for i in 0..n {
            s_m[i * n + i] += 1.0;
        }
        let s_inv = invert(&s_m, n)?;
        let a_sinv = crate::linalg::mat_mul(&a_k, &s_inv, n);
        let a_next = crate::linalg::mat_mul(&a_sinv, &a_k, n);
        let g_inc = crate::linalg::mat_mul(
            &crate::linalg::mat_mul(&a_sinv, &g, n),
            &transpose(&a_k, n),
            n,
        );
        let h_inc = crate::linalg::mat_mul(
            &crate::linalg::mat_mul(&transpose(&a_k, n), &crate::linalg::mat_mul(&h, &s_inv, n), n),
            &a_k,
            n,
        );
        let mut delta = 0.0;
        let mut scale = 1e-300;
        for i in 0..n * n {
            g[i] += g_inc[i];
            h[i] += h_inc[i];
            delta += h_inc[i].abs();
            scale += h[i].abs();
        }
        a_k = a_next;
        if delta / scale < 1e-14 {
            for i in 0..n {
                for j in (i + 1)..n {
                    let sym = 0.5 * (h[i * n + j] + h[j * n + i]);
                    h[i * n + j] = sym;
                    h[j * n + i] = sym;
                }
            }
            return Ok(h);
        }
    }
    Err(Error::NoSteadyState(
        "doubling iteration did not converge".into(),
    ))
}

fn invert(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col] == 0.0 {
            return Err(Error::Numerical("singular matrix in doubling step".into()));
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
                inv.swap(col * n + k, piv * n + k);
            }
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] /= d;
            inv[col * n + k] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..n {
                m[r * n + k] -= f * m[col * n + k];
                inv[r * n + k] -= f * inv[col * n + k];
            }
        }
    }
    Ok(inv)
}

/// Controllable-canonical state-space realization of a causal spectral
/// factor H(Ω) (poles in the lower half plane), as continuous-time matrices
/// over s = −iΩ: ẋ = A x + b w, out = c·x + d·w.
pub struct ShapingFilter {
    pub order: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
}

/// Builds the shaping filter of a rational single-sided PSD via spectral
/// factorization.
pub fn shaping_filter(psd: &crate::ratfun::RationalFunction) -> Result<ShapingFilter> {
    let pair = crate::factorize::spectral_factorize(psd)?;
    let h = pair.s_plus;
    let to_s = |p: &crate::ratfun::Polynomial| -> Vec<f64> {
        // q(s) = p(is): real up to rounding for conjugate-symmetric roots
        p.coeffs()
            .iter()
            .enumerate()
            .map(|(k, &cq)| {
                let ik = num_complex::Complex64::new(0.0, 1.0).powi(k as i32);
                (cq * ik).re
            })
            .collect()
    };
    let num_s = to_s(h.numerator());
    let den_s = to_s(h.denominator());
    let k = den_s.len() - 1;
    if k == 0 {
        return Ok(ShapingFilter {
            order: 0,
            a: Vec::new(),
            b: Vec::new(),
            c: Vec::new(),
            d: num_s[0] / den_s[0],
        });
    }
    let lead = den_s[k];
    let den_monic: Vec<f64> = den_s.iter().map(|v| v / lead).collect();
    let mut num_monic: Vec<f64> = num_s.iter().map(|v| v / lead).collect();
    num_monic.resize(k + 1, 0.0);
    let d = num_monic[k];
    // strictly proper remainder: num − d·den
    let c_row: Vec<f64> = (0..k)
        .map(|j| num_monic[j] - d * den_monic[j])
        .collect();
    let mut a = vec![0.0; k * k];
    for i in 0..k - 1 {
        a[i * k + i + 1] = 1.0;
    }
    for j in 0..k {
        a[(k - 1) * k + j] = -den_monic[j];
    }
    let mut b = vec![0.0; k];
    b[k - 1] = 1.0;
    Ok(ShapingFilter {
        order: k,
        a,
        b,
        c: c_row,
        d,
    })
}
