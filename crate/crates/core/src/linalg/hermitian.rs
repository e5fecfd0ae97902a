use super::ComplexMatrix;
use crate::error::{Error, Result};
use num_complex::Complex64;

const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// Householder tridiagonalization followed by implicit QL with Wilkinson
/// shifts. The input must be Hermitian to 1e-12 entrywise.
pub fn eigenvalues_hermitian(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = h.require_square()?;
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let mut a = h.data().to_vec();
    let (mut d, mut e) = tridiagonalize(&mut a, n);
    tql(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Reduces to a real symmetric tridiagonal (diagonal, off-diagonal magnitudes).
fn tridiagonalize(a: &mut [Complex64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    let mut off = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut tail2 = 0.0;
        for i in 0..m {
            v[i] = a[(k + 1 + i) * n + k];
            if i > 0 {
                tail2 += v[i].norm_sqr();
            }
        }
        if tail2 == 0.0 {
            off[k] = v[0].norm();
            continue;
        }
        let x0 = v[0];
        let norm = (x0.norm_sqr() + tail2).sqrt();
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        v[0] = x0 + phase * norm;
        let tau = 2.0 / (v[0].norm_sqr() + tail2);
        off[k] = norm;
        let v = &v[..m];
        let p = &mut p[..m];

        // Trailing block B = a[k+1.., k+1..]; B <- H B H with H = I - tau v v*.
        for i in 0..m {
            let row = &a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            p[i] = row.iter().zip(v).map(|(x, y)| x * y).sum::<Complex64>() * tau;
        }
        let vp: Complex64 = v.iter().zip(p.iter()).map(|(x, y)| x.conj() * y).sum();
        let kk = vp * (tau * 0.5);
        let q: Vec<Complex64> = p.iter().zip(v).map(|(pi, vi)| pi - kk * vi).collect();
        for i in 0..m {
            let (vi, qi) = (v[i], q[i]);
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for j in 0..m {
                row[j] -= vi * q[j].conj() + qi * v[j].conj();
            }
        }
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1) * n + n - 2].norm();
    }
    let d = (0..n).map(|i| a[i * n + i].re).collect();
    (d, off)
}

/// Implicit QL on a symmetric tridiagonal; `e[i]` couples `d[i]` and `d[i+1]`.
fn tql(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n < 2 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let max_sweeps = 40 * n;
    let mut total = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > max_sweeps {
                return Err(Error::NoConvergence(total - 1));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
