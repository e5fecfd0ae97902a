use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use num_complex::Complex64;

const SKEW_TOL: f64 = 1e-12;

fn check_skew(a: &ComplexMatrix) -> Result<usize> {
    let n = a.require_square()?;
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let scale = a.data().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = a.skew_defect();
    if defect > SKEW_TOL * scale {
        return Err(Error::NotSkew(defect));
    }
    Ok(n)
}

/// Pfaffian by Parlett–Reid skew-symmetric tridiagonalization with
/// partial pivoting. Row/column swaps flip the sign explicitly.
/// Dimensions 0, 2 and 4 use the closed forms.
pub fn pfaffian(a: &ComplexMatrix) -> Result<Complex64> {
    let n = check_skew(a)?;
    match n {
        0 => return Ok(Complex64::new(1.0, 0.0)),
        2 => return Ok(a[(0, 1)]),
        4 => return Ok(a[(0, 1)] * a[(2, 3)] - a[(0, 2)] * a[(1, 3)] + a[(1, 2)] * a[(0, 3)]),
        _ => {}
    }
    let mut m = a.data().to_vec();
    let at = |i: usize, j: usize| i * n + j;
    let mut pf = Complex64::new(1.0, 0.0);
    let mut tau = vec![Complex64::new(0.0, 0.0); n];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let (kp, big) =
            (k + 1..n).map(|i| (i, m[at(i, k)].norm())).fold((k + 1, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if kp != k + 1 {
            for j in 0..n {
                m.swap(at(k + 1, j), at(kp, j));
            }
            for i in 0..n {
                m.swap(at(i, k + 1), at(i, kp));
            }
            pf = -pf;
        }
        if big == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let piv = m[at(k, k + 1)];
        pf *= piv;
        if k + 2 < n {
            for j in k + 2..n {
                tau[j] = m[at(k, j)] / piv;
                col[j] = m[at(j, k + 1)];
            }
            for i in k + 2..n {
                let (ti, ci) = (tau[i], col[i]);
                for j in k + 2..n {
                    m[at(i, j)] += ti * col[j] - ci * tau[j];
                }
            }
        }
    }
    Ok(pf)
}

/// Pfaffian as the normalized sum over all of S_{2m}:
/// `Pf(A) = 1/(2^m m!) Σ_σ sgn(σ) Π_i a_{σ(2i−1) σ(2i)}`.
///
/// Factorial cost; limited to dimension ≤ 8.
pub fn pfaffian_permutation_sum(a: &ComplexMatrix) -> Result<Complex64> {
    let n = check_skew(a)?;
    if n > 8 {
        return Err(Error::Unsupported(format!("permutation-sum Pfaffian at dimension {n}")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Complex64::new(0.0, 0.0);
    // Heap's algorithm; each swap flips the sign.
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    let term = |p: &[usize]| -> Complex64 { p.chunks(2).map(|w| a[(w[0], w[1])]).product() };
    total += term(&perm) * sign;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            total += term(&perm) * sign;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let half = n / 2;
    let norm = 2f64.powi(half as i32) * (1..=half).map(|k| k as f64).product::<f64>();
    Ok(total / norm)
}
