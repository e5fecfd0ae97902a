//! Special functions evaluated in log space where magnitudes demand it.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::OnceLock;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Scaled complementary error function `exp(x²)·erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfc(-x) = 2 - erfc(x)
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < 26.0 {
        return (x * x).exp() * libm::erfc(x);
    }
    // Continued fraction erfc(x)·exp(x²)·√π = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
    let mut f = x;
    for k in (1..=40).rev() {
        f = x + (k as f64 * 0.5) / f;
    }
    1.0 / (SQRT_PI * f)
}

/// `ln erfc(x)`, finite for every finite `x`.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 0.5 {
        libm::erfc(x).ln()
    } else {
        erfcx(x).ln() - x * x
    }
}

/// Lower incomplete gamma `γ(a, x) = ∫_0^x t^{a-1} e^{-t} dt`.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(ln_lower_incomplete_gamma(a, x)?.exp())
}

/// `ln γ(a, x)`; `-inf` at `x = 0`.
///
/// Power series for `x < a + 1`, Lentz continued fraction for the upper
/// function otherwise.
pub fn ln_lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    if a.is_nan() || a <= 0.0 || x.is_nan() || x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("lower incomplete gamma at a={a}, x={x}")));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..10_000 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Ok(a * x.ln() - x + sum.ln())
    } else {
        let ln_upper = ln_upper_cf(a, x);
        let q = (ln_upper - ln_gamma(a)).exp();
        Ok(ln_gamma(a) + (-q).ln_1p())
    }
}

/// `ln Γ(a, x)` by the modified Lentz method; valid for `x ≥ a + 1`.
fn ln_upper_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    a * x.ln() - x + h.ln()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln k!`.
pub fn ln_factorial(k: u64) -> f64 {
    const TABLE_LEN: usize = 8192;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    match usize::try_from(k) {
        Ok(i) if i < TABLE_LEN => TABLE.get_or_init(|| (0..TABLE_LEN).map(|j| ln_gamma(j as f64 + 1.0)).collect())[i],
        _ => ln_gamma(k as f64 + 1.0),
    }
}

/// `e^{-u} Σ_{j=0}^{k} u^j / j!` for complex `u`.
pub fn scaled_exp_partial(k: u64, u: Complex64) -> Complex64 {
    ln_scaled_exp_partial(k, u).exp()
}

/// Complex logarithm (any branch) of [`scaled_exp_partial`].
///
/// Inside `|u| < k + 1` the complement `1 − e^{-u} Σ_{j>k} u^j/j!` is
/// summed; elsewhere the sum is factored around its last term. Scale
/// factors stay in log space, so large `k` and `|u|` never overflow.
pub fn ln_scaled_exp_partial(k: u64, u: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if u == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let kf = k as f64;
    let r = u.norm();
    if r < 0.5 * (kf + 1.0) {
        // The tail series is at most twice its leading term here; below
        // e^{-40} the partial sum equals e^u to working precision.
        let lead = -u.re + (kf + 1.0) * r.ln() - ln_factorial(k + 1) + std::f64::consts::LN_2;
        if lead < -40.0 {
            return Complex64::new(0.0, 0.0);
        }
    }
    if r < kf + 1.0 {
        ln_one_minus_exp(ln_exp_tail(k, u))
    } else {
        // Σ_{j≤k} u^j/j! = (u^k/k!) Σ_{i=0}^{k} k!/((k−i)! u^i)
        let mut term = one;
        let mut sum = one;
        for i in 0..k {
            term *= (kf - i as f64) / u;
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        -u + kf * u.ln() - ln_factorial(k) + sum.ln()
    }
}

/// `1 − e^{-u} Σ_{j=0}^{k} u^j / j!`, accurate when the partial sum is
/// close to `e^u`.
pub fn scaled_exp_deficit(k: u64, u: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if u.norm() < k as f64 + 1.0 {
        ln_exp_tail(k, u).exp()
    } else {
        one - scaled_exp_partial(k, u)
    }
}

/// `ln(e^{-u} Σ_{j>k} u^j/j!)` by the tail series (for `|u| < k + 1`).
fn ln_exp_tail(k: u64, u: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if u == Complex64::new(0.0, 0.0) {
        return Complex64::new(f64::NEG_INFINITY, 0.0);
    }
    let kf = k as f64;
    // tail = Σ_{i≥0} u^i (k+1)!/(k+1+i)!
    let mut term = one;
    let mut tail = one;
    for i in 0..1_000_000u64 {
        term *= u / (kf + 2.0 + i as f64);
        tail += term;
        if term.norm() <= 1e-17 * tail.norm() {
            break;
        }
    }
    -u + (kf + 1.0) * u.ln() - ln_factorial(k + 1) + tail.ln()
}

/// `ln(1 − e^l)` without overflow for large `Re l`.
fn ln_one_minus_exp(l: Complex64) -> Complex64 {
    if l.re > 1.0 {
        // 1 − e^l = −e^l (1 − e^{−l})
        l + Complex64::new(0.0, std::f64::consts::PI) + (Complex64::new(1.0, 0.0) - (-l).exp()).ln()
    } else {
        (Complex64::new(1.0, 0.0) - l.exp()).ln()
    }
}

/// Plain-sum reference of [`scaled_exp_partial`] for small arguments.
pub fn scaled_exp_partial_naive(k: u64, u: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for j in 1..=k {
        term *= u / j as f64;
        sum += term;
    }
    (-u).exp() * sum
}

/// `e^{-|w|} Σ_{m=0}^{n-1} w^{2m}/(2m)!` for real `w`, via
/// `½(E(w) + E(−w))` with `E` the partial exponential sum of degree 2n−2.
pub fn scaled_cosh_partial(n: u64, w: f64) -> f64 {
    ln_scaled_cosh_partial(n, w).exp()
}

/// Logarithm of [`scaled_cosh_partial`] (the sum is positive).
pub fn ln_scaled_cosh_partial(n: u64, w: f64) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    let x = w.abs();
    if x == 0.0 {
        return 0.0;
    }
    let k = 2 * n - 2;
    let lp = ln_scaled_exp_partial(k, Complex64::new(x, 0.0));
    let lm = ln_scaled_exp_partial(k, Complex64::new(-x, 0.0)) - 2.0 * x;
    // ½(e^{lp} + e^{lm}); both are real, so the phases are 0 or π.
    let top = lp.re.max(lm.re);
    let t = lp.im.cos() * (lp.re - top).exp() + lm.im.cos() * (lm.re - top).exp();
    top + t.ln() - std::f64::consts::LN_2
}
