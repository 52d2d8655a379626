//! Small dense-matrix helpers: symmetric eigenvalues by Jacobi rotation,
//! characteristic polynomials, and determinants for the low-dimensional
//! covariance algebra.

use num_complex::Complex64;

use crate::ratfun::Polynomial;

/// Eigenvalues of a symmetric matrix (row-major, n×n) by cyclic Jacobi.
pub fn symmetric_eigenvalues(mat: &[f64], n: usize) -> Vec<f64> {
    let mut a = mat.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        let scale: f64 = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
        if off.sqrt() <= 1e-15 * scale.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eig
}

/// Characteristic polynomial det(λI − A) of a real n×n matrix by the
/// Faddeev–LeVerrier recursion; coefficients ascending in λ.
pub fn characteristic_polynomial(a: &[f64], n: usize) -> Polynomial {
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = vec![0.0; n * n]; // M_0 = 0
    let mut c = 1.0; // c_n = 1
    for k in 1..=n {
        // M_k = A·M_{k-1} + c_{n-k+1}·I
        let mut mk = mat_mul(a, &m, n);
        for i in 0..n {
            mk[i * n + i] += c;
        }
        let tr: f64 = (0..n).map(|i| {
            (0..n).map(|j| a[i * n + j] * mk[j * n + i]).sum::<f64>()
        })
        .sum();
        c = -tr / k as f64;
        coeffs[n - k] = c;
        m = mk;
    }
    Polynomial::from_real(&coeffs)
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Determinant by LU with partial pivoting.
pub fn determinant(mat: &[f64], n: usize) -> f64 {
    let mut a = mat.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        det *= a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / a[col * n + col];
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

/// Symplectic eigenvalues of a 2k×2k covariance matrix in (x₁,p₁,x₂,p₂,…)
/// ordering: the moduli of the eigenvalues of J·V, each appearing once.
///
/// Computed through the characteristic polynomial of J·V and the library
/// root finder, which keeps the route independent of any closed-form
/// two-mode invariant expression.
pub fn symplectic_eigenvalues(v: &[f64], dim: usize) -> crate::Result<Vec<f64>> {
    assert!(dim % 2 == 0, "need an even dimension");
    // J: block-diagonal [[0,1],[-1,0]]
    let mut jv = vec![0.0; dim * dim];
    for b in 0..dim / 2 {
        let r0 = 2 * b;
        for j in 0..dim {
            jv[r0 * dim + j] = v[(r0 + 1) * dim + j];
            jv[(r0 + 1) * dim + j] = -v[r0 * dim + j];
        }
    }
    let charpoly = characteristic_polynomial(&jv, dim);
    let eig = crate::ratfun::roots(&charpoly)?;
    let mut mags: Vec<f64> = Vec::new();
    for (r, m) in eig {
        for _ in 0..m {
            if r.im > 0.0 || (r.im == 0.0 && r.re >= 0.0) {
                mags.push(r.norm());
            }
        }
    }
    mags.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(mags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_2x2() {
        let m = [2.0, 1.0, 1.0, 2.0];
        let e = symmetric_eigenvalues(&m, 2);
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn charpoly_3x3() {
        // diag(1,2,3): (λ−1)(λ−2)(λ−3) = λ³ − 6λ² + 11λ − 6
        let a = [1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 3.0];
        let p = characteristic_polynomial(&a, 3);
        let expect = [-6.0, 11.0, -6.0, 1.0];
        for (k, &e) in expect.iter().enumerate() {
            assert!((p.coeff(k) - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn determinant_4x4() {
        let mut a = vec![0.0; 16];
        for i in 0..4 {
            a[i * 4 + i] = (i + 1) as f64;
        }
        a[1] = 2.0;
        assert!((determinant(&a, 4) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn symplectic_eigs_of_thermal_state() {
        // V = diag(3, 3, 5, 5)·(ħ/2-scaled out): eigenvalues of JV are ±3i, ±5i
        let mut v = vec![0.0; 16];
        v[0] = 3.0;
        v[5] = 3.0;
        v[10] = 5.0;
        v[15] = 5.0;
        let nu = symplectic_eigenvalues(&v, 4).unwrap();
        assert!((nu[0] - 3.0).abs() < 1e-10);
        assert!((nu[1] - 5.0).abs() < 1e-10);
    }
}
