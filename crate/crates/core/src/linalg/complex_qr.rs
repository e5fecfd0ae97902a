//! Single-shift implicit QR for complex matrices.

use super::{balance, ComplexMatrix, Spectrum};
use crate::error::{Error, Result};
use num_complex::Complex64;

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// All eigenvalues of a square complex matrix.
///
/// Balancing, Householder reduction to Hessenberg form, then implicitly
/// shifted QR with Wilkinson shifts. No eigenvalue is flagged real.
pub fn eigenvalues_complex(m: &ComplexMatrix) -> Result<Spectrum> {
    let n = m.require_square()?;
    if n > 4096 {
        return Err(Error::Unsupported(format!("dimension {n} exceeds 4096")));
    }
    let trace = m.trace();
    let mut a = m.data().to_vec();
    balance(&mut a, n, abs1);
    hessenberg(&mut a, n);
    let eig = qr_eigenvalues(&mut a, n)?;
    Ok(Spectrum::new(eig, vec![false; n], trace))
}

pub(crate) fn hessenberg(a: &mut [Complex64], n: usize) {
    if n < 3 {
        return;
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut w = vec![zero; n];
    for k in 0..n - 2 {
        let m = n - k - 1;
        let mut tail2 = 0.0;
        for i in 0..m {
            v[i] = a[(k + 1 + i) * n + k];
            if i > 0 {
                tail2 += v[i].norm_sqr();
            }
        }
        if tail2 == 0.0 {
            continue;
        }
        let x0 = v[0];
        let norm = (x0.norm_sqr() + tail2).sqrt();
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        v[0] = x0 - alpha;
        let tau = 2.0 / (v[0].norm_sqr() + tail2);
        let v = &v[..m];

        let w = &mut w[..m];
        w.iter_mut().for_each(|x| *x = zero);
        for (i, vi) in v.iter().enumerate() {
            let vc = vi.conj();
            let row = &a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for (wj, &aij) in w.iter_mut().zip(row) {
                *wj += vc * aij;
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            let f = vi * tau;
            let row = &mut a[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            for (aij, &wj) in row.iter_mut().zip(w.iter()) {
                *aij -= f * wj;
            }
        }
        a[(k + 1) * n + k] = alpha;
        for i in k + 2..n {
            a[i * n + k] = zero;
        }
        for r in 0..n {
            let row = &mut a[r * n + k + 1..(r + 1) * n];
            let d: Complex64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
            if d != zero {
                let f = d * tau;
                for (x, vi) in row.iter_mut().zip(v) {
                    *x -= f * vi.conj();
                }
            }
        }
    }
}

/// Rotation (c, s) with c real such that [c s; -s̄ c]·[a; b] = [r; 0].
#[inline]
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, (b.conj()) / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // Eigenvalue of [[a, b], [c, d]] closest to d.
    let tr2 = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr2 * tr2 - det).sqrt();
    let l1 = tr2 + disc;
    let l2 = tr2 - disc;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn qr_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let idx = |i: usize, j: usize| i * n + j;
    let zero = Complex64::new(0.0, 0.0);
    let mut eig = vec![zero; n];
    let max_sweeps = 40 * n.max(1);
    let mut total = 0usize;
    let mut hi = n as isize - 1;
    let mut its = 0usize;
    while hi >= 0 {
        let hu = hi as usize;
        let mut l = hu;
        while l >= 1 {
            let s = abs1(h[idx(l - 1, l - 1)]) + abs1(h[idx(l, l)]);
            let sub = abs1(h[idx(l, l - 1)]);
            if sub <= f64::EPSILON * s || sub < f64::MIN_POSITIVE {
                h[idx(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hu {
            eig[hu] = h[idx(hu, hu)];
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        if total > max_sweeps {
            return Err(Error::NoConvergence(total - 1));
        }
        its += 1;
        let mu = if its.is_multiple_of(10) {
            let mut e = h[idx(hu, hu)] + h[idx(hu, hu - 1)].re.abs();
            if hu >= 2 {
                e += h[idx(hu - 1, hu - 2)].re.abs();
            }
            e
        } else {
            wilkinson_shift(h[idx(hu - 1, hu - 1)], h[idx(hu - 1, hu)], h[idx(hu, hu - 1)], h[idx(hu, hu)])
        };

        let mut x = h[idx(l, l)] - mu;
        let mut y = h[idx(l + 1, l)];
        for k in l..hu {
            let (c, s) = givens(x, y);
            let sc = s.conj();
            // Rows k, k+1 over columns max(l, k-1)..=hu.
            let j0 = if k > l { k - 1 } else { l };
            for j in j0..=hu {
                let p = h[idx(k, j)];
                let q = h[idx(k + 1, j)];
                h[idx(k, j)] = p * c + s * q;
                h[idx(k + 1, j)] = q * c - sc * p;
            }
            // Columns k, k+1 over rows l..=min(k+2, hu).
            let i1 = (k + 2).min(hu);
            for i in l..=i1 {
                let p = h[idx(i, k)];
                let q = h[idx(i, k + 1)];
                h[idx(i, k)] = p * c + sc * q;
                h[idx(i, k + 1)] = q * c - s * p;
            }
            if k + 1 < hu {
                x = h[idx(k + 1, k)];
                y = h[idx(k + 2, k)];
            }
        }
    }
    Ok(eig)
}
