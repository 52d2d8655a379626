//! Adaptive quadrature helpers used for independent cross-checks of the
//! closed-form residue integrals.

/// Adaptive Simpson integration of `f` on [a, b] to the requested absolute
/// tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    simpson_step(f, a, b, fa, fb, fm, simpson(a, b, fa, fm, fb), tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, fm, flm, left, tol * 0.5, depth - 1)
            + simpson_step(f, m, b, fm, fb, frm, right, tol * 0.5, depth - 1)
    }
}

/// ∫_{-∞}^{∞} f(Ω) dΩ by mapping the real line onto (−1, 1) with
/// Ω = scale·u/(1−u²).
pub fn integrate_real_line(f: &dyn Fn(f64) -> f64, scale: f64, tol: f64) -> f64 {
    let g = move |u: f64| {
        let d = 1.0 - u * u;
        if d <= 0.0 {
            return 0.0;
        }
        let omega = scale * u / d;
        let jac = scale * (1.0 + u * u) / (d * d);
        f(omega) * jac
    };
    adaptive_simpson(&g, -1.0 + 1e-12, 1.0 - 1e-12, tol)
}
