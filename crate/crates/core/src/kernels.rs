//! Correlation kernels of the real Ginibre ensemble at dimension 2n.
//!
//! Arguments are unscaled eigenvalue positions (entries of variance 1);
//! the variance quadratures rescale by √(2n) themselves.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::quadrature::{integrate_adaptive, tensor_rule, QuadratureOptions};
use crate::quatpfaff::pfaffian;
use crate::special::{
    ln_erfc, ln_factorial, ln_lower_incomplete_gamma, ln_scaled_cosh_partial, ln_scaled_exp_partial, scaled_exp_deficit,
};
use crate::testfn::TestFunction;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Both arguments in the open upper half plane.
    ComplexComplex,
    /// Both arguments on the real line.
    RealReal,
}

/// Evaluation context for the 2n-dimensional kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelContext {
    pub n: usize,
    pub regime: Regime,
    /// Start the `s_2n` sum at j = 0 (standard kernel) instead of j = 1.
    pub s2n_include_j0: bool,
    pub quadrature: QuadratureOptions,
}

impl KernelContext {
    pub fn new(n: usize, regime: Regime) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("half dimension must be at least 2, got {n}")));
        }
        Ok(Self { n, regime, s2n_include_j0: true, quadrature: QuadratureOptions::default() })
    }

    pub fn with_quadrature(mut self, q: QuadratureOptions) -> Self {
        self.quadrature = q;
        self
    }

    pub fn with_j0(mut self, include: bool) -> Self {
        self.s2n_include_j0 = include;
        self
    }

    fn require(&self, regime: Regime) -> Result<()> {
        if self.regime == regime {
            Ok(())
        } else {
            Err(Error::Domain(format!("kernel needs {regime:?}, context is {:?}", self.regime)))
        }
    }

    fn ln_s2n(&self, z: Complex64) -> Complex64 {
        ln_s2n(self.n, z, self.s2n_include_j0)
    }
}

/// `ln s_2n(z)` (complex log, any branch).
fn ln_s2n(n: usize, z: Complex64, include_j0: bool) -> Complex64 {
    let k = (2 * n - 2) as u64;
    let l = ln_scaled_exp_partial(k, z);
    if include_j0 {
        l
    } else {
        // s − e^{−z} = s·(1 − e^{−z − ln s})
        l + (Complex64::new(1.0, 0.0) - (-z - l).exp()).ln()
    }
}

/// Upper bound on `ln |s_2n(u)|`: `|s| ≤ 1 + 2|e^{−u} u^{K+1}/(K+1)!|` for
/// `|u| < (K+1)/2`, and `|s| ≤ e^{|u| − Re u}` always.
fn ln_abs_s2n_bound(n: usize, u: Complex64) -> f64 {
    let k = (2 * n - 2) as u64;
    let r = u.norm();
    let crude = r - u.re;
    if r > 0.0 && r < 0.5 * (k as f64 + 1.0) {
        let lead = -u.re + (k as f64 + 1.0) * r.ln() - ln_factorial(k + 1) + LN_2;
        crude.min(lead.exp().ln_1p())
    } else {
        crude
    }
}

/// `s_2n(z) = e^{−z} Σ_{j} z^j/j!` with j from 0 (or 1) to 2n − 2.
pub fn s2n(n: usize, z: Complex64, include_j0: bool) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return Complex64::new(if include_j0 { 1.0 } else { 0.0 }, 0.0);
    }
    ln_s2n(n, z, include_j0).exp()
}

/// `1 − s_2n(z)`, keeping full relative precision when `s_2n(z) ≈ 1`.
pub fn s2n_deficit(n: usize, z: Complex64, include_j0: bool) -> Complex64 {
    let d = scaled_exp_deficit((2 * n - 2) as u64, z);
    if include_j0 {
        d
    } else {
        d + (-z).exp()
    }
}

/// Leading correction of `1 − s_2n(2nu)` for `u` inside the unit disc:
/// `e^{2n(1−u)} u^{2n} / (2√(πn) u (1−u))`, from Stirling's formula on the
/// first omitted term.
pub fn s2n_correction(n: usize, u: Complex64) -> Complex64 {
    let nf = n as f64;
    let one = Complex64::new(1.0, 0.0);
    let ln = 2.0 * nf * (one - u + u.ln()) - (2.0 * (PI * nf).sqrt() * u * (one - u)).ln();
    ln.exp()
}

/// `ln G(z, w)` with `G = √(erfc(√2 Im z)·erfc(√2 Im w))`.
pub fn ln_kernel_g(z: Complex64, w: Complex64) -> f64 {
    0.5 * (ln_erfc(SQRT_2 * z.im) + ln_erfc(SQRT_2 * w.im))
}

pub fn kernel_g(z: Complex64, w: Complex64) -> f64 {
    ln_kernel_g(z, w).exp()
}

/// `S_2n(z, w)`, complex/complex regime.
pub fn s_cc(ctx: &KernelContext, z: Complex64, w: Complex64) -> Result<Complex64> {
    ctx.require(Regime::ComplexComplex)?;
    Ok(s_cc_unchecked(ctx, z, w))
}

pub(crate) fn s_cc_unchecked(ctx: &KernelContext, z: Complex64, w: Complex64) -> Complex64 {
    let d = w.conj() - z;
    if d == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    let e = -0.5 * (z - w.conj()).powi(2) + ln_kernel_g(z, w) - LN_SQRT_2PI + ctx.ln_s2n(z * w.conj()) + d.ln();
    I * e.exp()
}

/// `D_2n(z, w)`, complex/complex regime.
pub fn d_cc(ctx: &KernelContext, z: Complex64, w: Complex64) -> Result<Complex64> {
    ctx.require(Regime::ComplexComplex)?;
    Ok(d_cc_unchecked(ctx, z, w))
}

pub(crate) fn d_cc_unchecked(ctx: &KernelContext, z: Complex64, w: Complex64) -> Complex64 {
    let d = w - z;
    if d == Complex64::new(0.0, 0.0) {
        return d;
    }
    (-0.5 * (z - w).powi(2) + ln_kernel_g(z, w) - LN_SQRT_2PI + ctx.ln_s2n(z * w) + d.ln()).exp()
}

/// `ln |D_2n(z, w)|`, usable where the value underflows.
pub fn ln_abs_d_cc(ctx: &KernelContext, z: Complex64, w: Complex64) -> Result<f64> {
    ctx.require(Regime::ComplexComplex)?;
    let d = w - z;
    Ok((-0.5 * (z - w).powi(2) + ln_kernel_g(z, w) - LN_SQRT_2PI + ctx.ln_s2n(z * w)).re + d.norm().ln())
}

/// `I_2n(z, w)`, complex/complex regime.
pub fn i_cc(ctx: &KernelContext, z: Complex64, w: Complex64) -> Result<Complex64> {
    ctx.require(Regime::ComplexComplex)?;
    Ok(i_cc_unchecked(ctx, z, w))
}

pub(crate) fn i_cc_unchecked(ctx: &KernelContext, z: Complex64, w: Complex64) -> Complex64 {
    let (zc, wc) = (z.conj(), w.conj());
    let d = zc - wc;
    if d == Complex64::new(0.0, 0.0) {
        return d;
    }
    (-0.5 * (zc - wc).powi(2) + ln_kernel_g(z, w) - LN_SQRT_2PI + ctx.ln_s2n(zc * wc) + d.ln()).exp()
}

/// `e^{−(x−y)²/2} e^{−xy} Σ_{m≤2n−2} (xy)^m/m! / √(2π)`.
fn rr_core(n: usize, x: f64, y: f64) -> f64 {
    let l = ln_scaled_exp_partial((2 * n - 2) as u64, Complex64::new(x * y, 0.0));
    (l.re - 0.5 * (x - y).powi(2) - LN_SQRT_2PI).exp() * l.im.cos()
}

/// Correction term of `S_rr`:
/// `e^{−x²/2} 2^{n−3/2}/(√(2π)(2n−2)!) x^{2n−1} sgn(y) γ(n−½, y²/2)`.
pub fn s_rr_correction(n: usize, x: f64, y: f64) -> f64 {
    ln_abs_s_rr_correction(n, x, y).map(|l| l.exp() * x.signum() * y.signum()).unwrap_or(0.0)
}

/// `ln |correction|`; `None` when the term vanishes (x = 0 or y = 0).
pub fn ln_abs_s_rr_correction(n: usize, x: f64, y: f64) -> Option<f64> {
    if x == 0.0 || y == 0.0 {
        return None;
    }
    let nf = n as f64;
    let lg = ln_lower_incomplete_gamma(nf - 0.5, 0.5 * y * y).ok()?;
    Some(
        -0.5 * x * x + (nf - 1.5) * LN_2 - LN_SQRT_2PI - ln_factorial((2 * n - 2) as u64)
            + (2.0 * nf - 1.0) * x.abs().ln()
            + lg,
    )
}

/// `S_2n(x, y)`, real/real regime.
pub fn s_rr(ctx: &KernelContext, x: f64, y: f64) -> Result<f64> {
    ctx.require(Regime::RealReal)?;
    Ok(s_rr_unchecked(ctx.n, x, y))
}

pub(crate) fn s_rr_unchecked(n: usize, x: f64, y: f64) -> f64 {
    rr_core(n, x, y) + s_rr_correction(n, x, y)
}

/// `D_2n(x, y)`, real/real regime.
pub fn d_rr(ctx: &KernelContext, x: f64, y: f64) -> Result<f64> {
    ctx.require(Regime::RealReal)?;
    Ok((y - x) * rr_core(ctx.n, x, y))
}

/// Integrand of the half-integral `H`: `e^{−(x²+u²)/2} C_n(ux) / √(2π)`.
#[inline]
fn h_integrand(n: usize, x: f64, u: f64) -> f64 {
    let a = x.abs() - u.abs();
    (-0.5 * a * a - LN_SQRT_2PI + ln_scaled_cosh_partial(n as u64, u * x)).exp()
}

/// `H(x, y) = (1/√(2π)) ∫_0^y e^{−(x²+u²)/2} C_n(ux) du`, odd in y.
pub fn h_integral(n: usize, x: f64, y: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let v = integrate_adaptive(|u| h_integrand(n, x, u), 0.0, y.abs(), 1e-14).unwrap_or(f64::NAN);
    v * y.signum()
}

/// `I_2n(x, y) = H(x, y) − H(y, x) + ½ sgn(x − y)`, real/real regime.
pub fn i_rr(ctx: &KernelContext, x: f64, y: f64) -> Result<f64> {
    ctx.require(Regime::RealReal)?;
    Ok(i_rr_unchecked(ctx.n, x, y))
}

pub(crate) fn i_rr_unchecked(n: usize, x: f64, y: f64) -> f64 {
    if x == y {
        return 0.0;
    }
    h_integral(n, x, y) - h_integral(n, y, x) + 0.5 * (x - y).signum()
}

/// 2×2 block `[[D(a,b), S(a,b)], [−S(b,a), I(a,b)]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBlock(pub [[Complex64; 2]; 2]);

pub fn kernel_block(ctx: &KernelContext, a: Complex64, b: Complex64) -> Result<KernelBlock> {
    let c = |x: f64| Complex64::new(x, 0.0);
    Ok(match ctx.regime {
        Regime::ComplexComplex => {
            KernelBlock([[d_cc(ctx, a, b)?, s_cc(ctx, a, b)?], [-s_cc(ctx, b, a)?, i_cc(ctx, a, b)?]])
        }
        Regime::RealReal => {
            if a.im != 0.0 || b.im != 0.0 {
                return Err(Error::Domain("real/real kernel at a non-real point".into()));
            }
            let (x, y) = (a.re, b.re);
            KernelBlock([[c(d_rr(ctx, x, y)?), c(s_rr(ctx, x, y)?)], [c(-s_rr(ctx, y, x)?), c(i_rr(ctx, x, y)?)]])
        }
    })
}

/// k-point correlation `Pf(K(x_i, x_j))`, k ≤ 6.
pub fn correlation(ctx: &KernelContext, points: &[Complex64]) -> Result<f64> {
    let k = points.len();
    if k == 0 || k > 6 {
        return Err(Error::Unsupported(format!("{k}-point correlation")));
    }
    if ctx.regime == Regime::ComplexComplex && points.iter().any(|z| z.im <= 0.0) {
        return Err(Error::Domain("complex/complex kernel needs Im > 0".into()));
    }
    let mut m = ComplexMatrix::zeros(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            let b = kernel_block(ctx, points[i], points[j])?;
            for r in 0..2 {
                for c in 0..2 {
                    m[(2 * i + r, 2 * j + c)] = b.0[r][c];
                }
            }
        }
    }
    let scale = m.data().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = m.skew_defect();
    if defect > 1e-10 * scale {
        return Err(Error::NotSkew(defect));
    }
    // Antisymmetrize exactly before the Pfaffian.
    let sym = ComplexMatrix::from_fn(2 * k, 2 * k, |i, j| 0.5 * (m[(i, j)] - m[(j, i)]));
    Ok(pfaffian(&sym)?.re)
}

/// Expected number of real eigenvalues of a 2n-dimensional real Ginibre
/// matrix: `∫ S_rr(x, x) dx` over the real line (unscaled coordinates).
pub fn expected_real_count(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let edge = (2.0 * n as f64).sqrt() + 12.0;
    let f = |x: f64| s_rr_unchecked(n, x, x);
    // Even integrand; split at the spectral edge for the adaptive rule.
    let e = (2.0 * n as f64).sqrt();
    let a = integrate_adaptive(f, 0.0, e, 1e-12)?;
    let b = integrate_adaptive(f, e, edge, 1e-12)?;
    Ok(2.0 * (a + b))
}

/// `√(2n)·S_rr(√(2n)x, √(2n)x)`: density of real eigenvalues of the
/// 1/√(2n)-scaled matrix.
pub fn real_density_scaled(n: usize, x: f64) -> f64 {
    let r = (2.0 * n as f64).sqrt();
    r * s_rr_unchecked(n, r * x, r * x)
}

/// `2n·S_cc(√(2n)z, √(2n)z)`: density of complex eigenvalues of the
/// scaled matrix at `z` in the upper half plane.
pub fn complex_density_scaled(ctx: &KernelContext, z: Complex64) -> f64 {
    let r = (2.0 * ctx.n as f64).sqrt();
    2.0 * ctx.n as f64 * s_cc_unchecked(ctx, z * r, z * r).re
}

/// Pieces of the finite-n variance: `total = one_point − pair_ss − pair_di`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceTerms {
    /// `c₁ ∫ f² S(r x, r x)` with `r = √(2n)`.
    pub one_point: f64,
    /// `c₂ ∬ f(x) f(y) S(r x, r y) S(r y, r x)`.
    pub pair_ss: f64,
    /// `c₂ ∬ f(x) f(y) D(r x, r y) I(r x, r y)`.
    pub pair_di: f64,
    pub total: f64,
}

impl VarianceTerms {
    fn new(one_point: f64, pair_ss: f64, pair_di: f64) -> Self {
        Self { one_point, pair_ss, pair_di, total: one_point - pair_ss - pair_di }
    }

    /// The determinantal part `one_point − pair_ss`.
    pub fn s_part(&self) -> f64 {
        self.one_point - self.pair_ss
    }
}

/// Exact variance of `Σ f(λ_j)` over the eigenvalues of a 2n-dimensional real
/// Ginibre matrix scaled by `1/√(2n)`. Complex regime: `f` supported in the
/// open upper half plane, `c₁ = 2n`, `c₂ = 4n²`. Real regime: `f` an interval
/// bump, `c₁ = √(2n)`, `c₂ = 2n`.
pub fn finite_n_variance(ctx: &KernelContext, f: &TestFunction) -> Result<f64> {
    Ok(finite_n_variance_terms(ctx, f)?.total)
}

pub fn finite_n_variance_terms(ctx: &KernelContext, f: &TestFunction) -> Result<VarianceTerms> {
    match ctx.regime {
        Regime::ComplexComplex => variance_cc(ctx, f),
        Regime::RealReal => variance_rr(ctx, f),
    }
}

/// Quadrature nodes (scaled coordinates) inside the support of `f`, with
/// weights and `f` values.
pub(crate) fn planar_nodes(ctx: &KernelContext, f: &TestFunction) -> Result<Vec<(Complex64, f64, f64)>> {
    if !f.is_compact() || f.is_line() {
        return Err(Error::Support(format!("{f} is not a compactly supported planar function")));
    }
    let (bx, by) = f.bounding_box();
    if by.0 <= 0.0 {
        return Err(Error::Support(format!("{f} reaches the real axis")));
    }
    Ok(tensor_rule(bx, by, ctx.quadrature)
        .into_iter()
        .filter_map(|(x, y, w)| {
            let v = f.eval(x, y);
            (v != 0.0).then_some((Complex64::new(x, y), w, v))
        })
        .collect())
}

fn variance_cc(ctx: &KernelContext, f: &TestFunction) -> Result<VarianceTerms> {
    let nodes = planar_nodes(ctx, f)?;
    let nf = ctx.n as f64;
    let r = (2.0 * nf).sqrt();
    let pts: Vec<Complex64> = nodes.iter().map(|p| p.0 * r).collect();
    let ln_e: Vec<f64> = pts.iter().map(|z| 0.5 * ln_erfc(SQRT_2 * z.im)).collect();
    let one: f64 = nodes.iter().zip(&pts).map(|(&(_, w, v), &z)| w * v * v * s_cc_unchecked(ctx, z, z).re).sum();
    // |S(z,w)|² and |D(z,w)|² from their log moduli; I = −conj(D) makes
    // D·I = −|D|², and S(w,z) = conj S(z,w) makes S·S' = |S|².
    let rows: Vec<(f64, f64)> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let (zi, wi, vi) = (pts[i], nodes[i].1, nodes[i].2);
            let (mut ss, mut dd) = (0.0, 0.0);
            for j in 0..=i {
                let zj = pts[j];
                let wt = if i == j { 1.0 } else { 2.0 } * wi * nodes[j].1 * vi * nodes[j].2;
                let base = ln_e[i] + ln_e[j] - LN_SQRT_2PI;
                let ws = zj.conj() - zi;
                let ls = -0.5 * ws * ws + ctx.ln_s2n(zi * zj.conj());
                ss += wt * (2.0 * (ls.re + base) + ws.norm_sqr().ln()).exp();
                if i != j {
                    let wd = zj - zi;
                    let g = -0.5 * wd * wd;
                    let l0 = 2.0 * (g.re + base) + wd.norm_sqr().ln();
                    // Skip |D|² below e^{-45}, negligible against |S(z,z)|² ≈ π^{-2}.
                    if l0 + 2.0 * ln_abs_s2n_bound(ctx.n, zi * zj) > -45.0 {
                        dd += wt * (l0 + 2.0 * ctx.ln_s2n(zi * zj).re).exp();
                    }
                }
            }
            (ss, dd)
        })
        .collect();
    let (ss, dd) = rows.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let c2 = 4.0 * nf * nf;
    Ok(VarianceTerms::new(2.0 * nf * one, c2 * ss, -c2 * dd))
}

fn variance_rr(ctx: &KernelContext, f: &TestFunction) -> Result<VarianceTerms> {
    let TestFunction::IntervalBump { a, b, .. } = *f else {
        return Err(Error::Support(format!("{f} is not an interval bump")));
    };
    let n = ctx.n;
    let r = (2.0 * n as f64).sqrt();
    let rule = ctx.quadrature.rule(a, b);
    let nodes: Vec<(f64, f64, f64)> =
        rule.nodes.iter().zip(&rule.weights).map(|(&x, &w)| (x * r, w, f.eval(x, 0.0))).collect();
    let one: f64 = nodes.iter().map(|&(x, w, v)| w * v * v * s_rr_unchecked(n, x, x)).sum();
    let rows: Vec<(f64, f64)> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let (xi, wi, vi) = nodes[i];
            let (mut ss, mut di) = (0.0, 0.0);
            for &(xj, wj, vj) in &nodes {
                let wt = wi * wj * vi * vj;
                ss += wt * s_rr_unchecked(n, xi, xj) * s_rr_unchecked(n, xj, xi);
                if xi != xj {
                    di += wt * (xj - xi) * rr_core(n, xi, xj) * i_rr_unchecked(n, xi, xj);
                }
            }
            (ss, di)
        })
        .collect();
    let (ss, di) = rows.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let c2 = 2.0 * n as f64;
    Ok(VarianceTerms::new(r * one, c2 * ss, c2 * di))
}
