//! Polynomial root finding by Aberth–Ehrlich iteration.
//!
//! The polynomial is nondimensionalized by its characteristic root scale
//! before iterating, so SI-frequency coefficients spanning many decades stay
//! conditioned. Roots closer than a relative clustering tolerance are merged
//! into a single multiple root at their centroid.

use num_complex::Complex64;

use super::poly::Polynomial;
use crate::error::{Error, Result};
use crate::ROOT_CLUSTER_REL;

const MAX_ITER: usize = 400;
const STEP_TOL: f64 = 1e-15;

/// All complex roots of `p`, clustered into `(root, multiplicity)` pairs.
///
/// The residual contract is checked in the nondimensionalized frame:
/// |q(r)| ≤ 1e-10·max(1,|r|)^deg for each simple root of the monic rescaled
/// polynomial q, with a multiplicity-aware relaxation for clustered roots.
pub fn roots(p: &Polynomial) -> Result<Vec<(Complex64, usize)>> {
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::domain(
            "root finding requires a polynomial of degree >= 1",
        ));
    }

    // Exact zero roots come from trailing zero coefficients.
    let mut coeffs = p.coeffs().to_vec();
    let mut zero_mult = 0usize;
    while coeffs.len() > 1 && coeffs[0] == Complex64::default() {
        coeffs.remove(0);
        zero_mult += 1;
    }
    let stripped = Polynomial::new(coeffs);

    let mut clustered: Vec<(Complex64, usize)> = Vec::new();
    if stripped.degree() >= 1 {
        let scale = stripped.characteristic_scale();
        let scaled = stripped.rescale_variable(scale);
        let monic = scaled.scale(1.0 / scaled.leading());
        let mut raw = aberth(&monic)?;
        polish(&monic, &mut raw);
        let merged = cluster_adaptive(&monic, &raw);
        verify_residuals(&monic, &merged)?;
        clustered = merged
            .into_iter()
            .map(|(z, m)| (z * scale, m))
            .collect();
    }
    if zero_mult > 0 {
        // merge the exact zero root with any numerically-zero cluster
        let scale = p.characteristic_scale();
        let mut merged = false;
        for entry in clustered.iter_mut() {
            if entry.0.norm() <= 1e-13 * scale {
                let total = entry.1 + zero_mult;
                entry.0 = entry.0 * (entry.1 as f64 / total as f64);
                entry.1 = total;
                merged = true;
                break;
            }
        }
        if !merged {
            clustered.push((Complex64::default(), zero_mult));
        }
    }
    Ok(clustered)
}

fn aberth(monic: &Polynomial) -> Result<Vec<Complex64>> {
    let n = monic.degree();
    let mut z = initial_guesses(monic);
    let mut stagnant = 0usize;
    let mut prev_step = f64::INFINITY;

    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (pv, dv) = monic.eval_with_derivative(z[i]);
            if pv == Complex64::default() {
                continue;
            }
            let newton = if dv.norm() > 0.0 {
                pv / dv
            } else {
                // derivative vanished (multiple-root center); nudge off
                Complex64::new(1e-8, 1e-8)
            };
            let mut repulsion = Complex64::default();
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let d = z[i] - zj;
                    if d.norm() > 1e-300 {
                        repulsion += d.inv();
                    } else {
                        repulsion += Complex64::new(1e12, 1e12);
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
            let step = if denom.norm() > 1e-300 {
                newton / denom
            } else {
                newton
            };
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < STEP_TOL {
            return Ok(z);
        }
        // Clusters of multiple roots stall around eps^{1/m}; stop once the
        // step size plateaus and let the residual check arbitrate.
        if max_step > 0.5 * prev_step {
            stagnant += 1;
            if stagnant > 40 && max_step < 1e-6 {
                return Ok(z);
            }
        } else {
            stagnant = 0;
        }
        prev_step = max_step;
    }
    Ok(z)
}

fn initial_guesses(monic: &Polynomial) -> Vec<Complex64> {
    let n = monic.degree();
    // Cauchy-style radius from coefficient magnitudes of the monic polynomial
    let mut radius: f64 = 0.0;
    for (k, c) in monic.coeffs().iter().enumerate().take(n) {
        let m = c.norm();
        if m > 0.0 {
            radius = radius.max(2.0 * m.powf(1.0 / (n - k) as f64));
        }
    }
    if radius == 0.0 {
        radius = 1.0;
    }
    (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.437;
            radius * Complex64::new(theta.cos(), theta.sin())
        })
        .collect()
}

/// Two Newton steps on each point; simple roots sharpen to machine
/// precision, points inside multiple-root clusters move within the cluster.
fn polish(monic: &Polynomial, z: &mut [Complex64]) {
    for zi in z.iter_mut() {
        for _ in 0..2 {
            let (p, d) = monic.eval_with_derivative(*zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = p / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            *zi -= step;
        }
    }
}

/// Clusters raw iterates into multiple roots.
///
/// A base pass merges points within the relative clustering tolerance; a
/// promotion pass then merges clusters whose joint centroid still evaluates
/// at backward-error level, which recovers multiplicities ≥ 3 whose iterates
/// scatter like eps^{1/m}.
fn cluster_adaptive(monic: &Polynomial, raw: &[Complex64]) -> Vec<(Complex64, usize)> {
    let mut clusters = cluster(raw, ROOT_CLUSTER_REL);
    loop {
        let mut merged = false;
        'pairs: for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let (ci, mi) = clusters[i];
                let (cj, mj) = clusters[j];
                let m = mi + mj;
                // candidate ball sized for the worst-case eps^{1/m} scatter;
                // the centroid residual test below is what actually decides
                let reach = 0.05 * (1.0 + ci.norm().max(cj.norm()));
                if (ci - cj).norm() > reach {
                    continue;
                }
                let cand = (ci * mi as f64 + cj * mj as f64) / m as f64;
                if monic.eval(cand).norm() <= 1e-12 * monic.eval_magnitude(cand) {
                    clusters[i] = (cand, m);
                    clusters.swap_remove(j);
                    merged = true;
                    break 'pairs;
                }
            }
        }
        if !merged {
            break;
        }
    }
    clusters
}

fn verify_residuals(monic: &Polynomial, clustered: &[(Complex64, usize)]) -> Result<()> {
    let n = monic.degree();
    for &(r, _) in clustered {
        let res = monic.eval(r).norm();
        let bound = 1e-10 * r.norm().max(1.0).powi(n as i32) + 1e-12 * monic.eval_magnitude(r);
        if res > bound {
            return Err(Error::Numerical(format!(
                "root residual {res:.3e} exceeds bound {bound:.3e} at {r}"
            )));
        }
    }
    Ok(())
}

/// Greedy merge of roots lying within `rel_tol` of each other (relative to
/// the larger magnitude); each cluster becomes a multiple root at the
/// centroid.
pub fn cluster(roots: &[Complex64], rel_tol: f64) -> Vec<(Complex64, usize)> {
    let overall = roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    // the absolute floor sits at rounding level of the dominant root scale:
    // roots much smaller than the largest one are still resolved relative
    // to their own magnitude
    let floor = overall * 1e-13;
    let mut taken = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if taken[i] {
            continue;
        }
        let mut members = vec![roots[i]];
        taken[i] = true;
        let mut centroid = roots[i];
        let mut changed = true;
        while changed {
            changed = false;
            for (j, &rj) in roots.iter().enumerate() {
                if taken[j] {
                    continue;
                }
                let scale = centroid.norm().max(rj.norm()).max(1e-300);
                let tol = (rel_tol * scale).max(floor);
                if (rj - centroid).norm() <= tol {
                    members.push(rj);
                    taken[j] = true;
                    centroid =
                        members.iter().sum::<Complex64>() / members.len() as f64;
                    changed = true;
                }
            }
        }
        out.push((centroid, members.len()));
    }
    out
}

/// Expands clustered roots back to a flat list, repeating by multiplicity.
pub fn expand_multiplicities(roots: &[(Complex64, usize)]) -> Vec<Complex64> {
    roots
        .iter()
        .flat_map(|&(r, m)| std::iter::repeat(r).take(m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_contains_root(roots: &[(Complex64, usize)], target: Complex64, tol: f64) {
        assert!(
            roots.iter().any(|(r, _)| (r - target).norm() < tol),
            "no root near {target} in {roots:?}"
        );
    }

    #[test]
    fn quadratic_omega_squared_plus_one() {
        let p = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let r = roots(&p).unwrap();
        assert_eq!(r.iter().map(|(_, m)| m).sum::<usize>(), 2);
        assert_contains_root(&r, c(0.0, 1.0), 1e-12);
        assert_contains_root(&r, c(0.0, -1.0), 1e-12);
    }

    #[test]
    fn cubic_with_integer_roots() {
        // (Ω−1)(Ω−2)(Ω−3) = Ω³ − 6Ω² + 11Ω − 6
        let p = Polynomial::from_real(&[-6.0, 11.0, -6.0, 1.0]);
        let r = roots(&p).unwrap();
        assert_contains_root(&r, c(1.0, 0.0), 1e-10);
        assert_contains_root(&r, c(2.0, 0.0), 1e-10);
        assert_contains_root(&r, c(3.0, 0.0), 1e-10);
    }

    #[test]
    fn quadruple_zero_root() {
        // Ω⁴ has an exact zero root of multiplicity 4
        let p = Polynomial::from_real(&[0.0, 0.0, 0.0, 0.0, 1.0]);
        let r = roots(&p).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].1, 4);
        assert_eq!(r[0].0, Complex64::default());
    }

    #[test]
    fn double_root_clusters() {
        // (Ω − 2)²(Ω + 1)
        let p = Polynomial::from_roots(
            c(1.0, 0.0),
            &[(c(2.0, 0.0), 2), (c(-1.0, 0.0), 1)],
        );
        let r = roots(&p).unwrap();
        let double = r.iter().find(|(root, _)| (root - c(2.0, 0.0)).norm() < 1e-5);
        assert_eq!(double.unwrap().1, 2);
    }

    #[test]
    fn si_scale_quartic() {
        // Ω⁴ + q₂² with q₂ = (2π·100)² — roots at magnitude 628.3
        let q2 = (2.0 * std::f64::consts::PI * 100.0_f64).powi(2);
        let p = Polynomial::from_real(&[q2 * q2, 0.0, 0.0, 0.0, 1.0]);
        let r = roots(&p).unwrap();
        let s = q2.sqrt();
        let half = std::f64::consts::FRAC_1_SQRT_2;
        for target in [
            c(s * half, s * half),
            c(-s * half, s * half),
            c(s * half, -s * half),
            c(-s * half, -s * half),
        ] {
            assert_contains_root(&r, target, 1e-8 * s);
        }
    }

    #[test]
    fn random_degree_eight_residuals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let coeffs: Vec<Complex64> = (0..9)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let p = Polynomial::new(coeffs);
            if p.degree() < 8 {
                continue;
            }
            let r = roots(&p).unwrap();
            let total: usize = r.iter().map(|(_, m)| m).sum();
            assert_eq!(total, 8);
            for (root, _) in &r {
                let res = p.eval(*root).norm();
                let scale = p.leading().norm() * root.norm().max(1.0).powi(8);
                assert!(res / scale < 1e-10, "residual {res:.2e} vs {scale:.2e}");
            }
        }
    }
}

