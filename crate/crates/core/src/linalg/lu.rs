use super::ComplexMatrix;
use crate::error::Result;
use num_complex::Complex64;

/// Partially pivoted LU; returns (U diagonal, permutation parity).
/// `None` when a zero pivot column is met.
fn lu_diag(m: &ComplexMatrix) -> Result<Option<(Vec<Complex64>, bool)>> {
    let n = m.require_square()?;
    let mut a = m.data().to_vec();
    let mut odd = false;
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let (piv, pmax) =
            (k..n).map(|i| (i, a[i * n + k].norm())).fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax == 0.0 {
            return Ok(None);
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            odd = !odd;
        }
        let pivot = a[k * n + k];
        diag.push(pivot);
        let inv = 1.0 / pivot;
        let (top, bottom) = a.split_at_mut((k + 1) * n);
        let prow = &top[k * n + k + 1..k * n + n];
        for row in bottom.chunks_exact_mut(n) {
            let f = row[k] * inv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (x, &p) in row[k + 1..].iter_mut().zip(prow) {
                *x -= f * p;
            }
        }
    }
    Ok(Some((diag, odd)))
}

/// log|det M| by partially pivoted LU; `-inf` for an exactly singular matrix.
pub fn lu_logabsdet(m: &ComplexMatrix) -> Result<f64> {
    Ok(match lu_diag(m)? {
        Some((diag, _)) => diag.iter().map(|u| u.norm().ln()).sum(),
        None => f64::NEG_INFINITY,
    })
}

/// Determinant by partially pivoted LU.
pub fn lu_det(m: &ComplexMatrix) -> Result<Complex64> {
    Ok(match lu_diag(m)? {
        Some((diag, odd)) => {
            let p: Complex64 = diag.iter().product();
            if odd {
                -p
            } else {
                p
            }
        }
        None => Complex64::new(0.0, 0.0),
    })
}
