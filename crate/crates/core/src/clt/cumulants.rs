//! k-statistics, normality checks and the Costin–Lebowitz cumulants.

use super::combinatorics::{compositions, multinomial};
use crate::error::{Error, Result};
use crate::kernels::{planar_nodes, s_cc_unchecked, KernelContext, Regime};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

/// Cumulant estimates from a batch of scalar samples.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct CumulantReport {
    pub sample_count: usize,
    /// `kappa[r − 1]` estimates κ_r: Fisher k-statistics for r ≤ 4, plug-in
    /// cumulants of the empirical law for r = 5, 6.
    pub kappa: Vec<f64>,
    /// Jackknife standard errors, present when the sample is large enough.
    pub se_k2: Option<f64>,
    pub se_k3: Option<f64>,
    pub se_k4: Option<f64>,
}

impl CumulantReport {
    pub fn kappa(&self, order: usize) -> Option<f64> {
        order.checked_sub(1).and_then(|i| self.kappa.get(i).copied())
    }
}

/// Fisher k-statistics k₁..k₄ from power sums `s_r = Σ y^r` of `n` values.
fn fisher(n: f64, s: [f64; 5]) -> [f64; 4] {
    let [_, s1, s2, s3, s4] = s;
    let k1 = s1 / n;
    let k2 = (n * s2 - s1 * s1) / (n * (n - 1.0));
    let k3 = (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0));
    let k4 =
        (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2 - 3.0 * n * (n - 1.0) * s2 * s2 - 4.0 * n * (n + 1.0) * s1 * s3
            + n * n * (n + 1.0) * s4)
            / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
    [k1, k2.max(0.0), k3, k4]
}

/// k-statistics up to `max_order ≤ 6` with jackknife errors for κ₂..κ₄.
pub fn k_statistics(samples: &[f64], max_order: usize) -> Result<CumulantReport> {
    if !(1..=6).contains(&max_order) {
        return Err(Error::Unsupported(format!("cumulant order {max_order}")));
    }
    let count = samples.len();
    if count < max_order.max(2) {
        return Err(Error::InsufficientSamples { have: count, need: max_order.max(2) });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    // Shift by the first value (exact zeros for constant data), then center.
    let x0 = samples[0];
    let mean_shift = samples.iter().map(|x| x - x0).sum::<f64>() / count as f64;
    let d: Vec<f64> = samples.iter().map(|x| (x - x0) - mean_shift).collect();
    let mut s = [0.0; 7];
    for &v in &d {
        let mut p = 1.0;
        for sr in s.iter_mut() {
            *sr += p;
            p *= v;
        }
    }
    let n = count as f64;
    let k = fisher(n, [s[0], s[1], s[2], s[3], s[4]]);
    let mut kappa = vec![k[0] + x0 + mean_shift];
    for r in 2..=max_order.min(4) {
        kappa.push(k[r - 1]);
    }
    if max_order >= 5 {
        let m = |r: usize| s[r] / n;
        kappa.push(m(5) - 10.0 * m(2) * m(3));
    }
    if max_order >= 6 {
        let m = |r: usize| s[r] / n;
        kappa.push(m(6) - 15.0 * m(4) * m(2) - 10.0 * m(3).powi(2) + 30.0 * m(2).powi(3));
    }

    let jack = |order: usize| -> Option<f64> {
        if max_order < order || count < order + 2 {
            return None;
        }
        let nm = n - 1.0;
        let loo: Vec<f64> = d
            .iter()
            .map(|&v| {
                let t = [nm, s[1] - v, s[2] - v * v, s[3] - v.powi(3), s[4] - v.powi(4)];
                fisher(nm, t)[order - 1]
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / n;
        let var = loo.iter().map(|t| (t - mean).powi(2)).sum::<f64>() * (n - 1.0) / n;
        Some(var.sqrt())
    };
    Ok(CumulantReport { sample_count: count, kappa, se_k2: jack(2), se_k3: jack(3), se_k4: jack(4) })
}

/// Outcome of the Gaussian-limit checks on a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalityReport {
    pub kappa2: f64,
    pub predicted_variance: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub kappa3: f64,
    pub se_k3: f64,
    pub kappa4: f64,
    pub se_k4: f64,
    pub kappa2_ok: bool,
    pub kappa3_ok: bool,
    pub kappa4_ok: bool,
    pub pass: bool,
}

/// `|κ₂ − v| ≤ tol·v`, `|κ₃| ≤ 4·SE(κ₃)`, `|κ₄| ≤ 4·SE(κ₄)`.
pub fn normality_report(report: &CumulantReport, predicted_variance: f64, tol: f64) -> Result<NormalityReport> {
    if report.sample_count < 1000 {
        return Err(Error::InsufficientSamples { have: report.sample_count, need: 1000 });
    }
    let missing = || Error::Domain("report lacks κ₂..κ₄ or their standard errors".into());
    let (k2, k3, k4) = (
        report.kappa(2).ok_or_else(missing)?,
        report.kappa(3).ok_or_else(missing)?,
        report.kappa(4).ok_or_else(missing)?,
    );
    let (se3, se4) = (report.se_k3.ok_or_else(missing)?, report.se_k4.ok_or_else(missing)?);
    let relative_error = (k2 - predicted_variance).abs() / predicted_variance.abs();
    let kappa2_ok = relative_error <= tol;
    let kappa3_ok = k3.abs() <= 4.0 * se3;
    let kappa4_ok = k4.abs() <= 4.0 * se4;
    Ok(NormalityReport {
        kappa2: k2,
        predicted_variance,
        relative_error,
        tolerance: tol,
        kappa3: k3,
        se_k3: se3,
        kappa4: k4,
        se_k4: se4,
        kappa2_ok,
        kappa3_ok,
        kappa4_ok,
        pass: kappa2_ok && kappa3_ok && kappa4_ok,
    })
}

/// Largest node count for the O(N³) three-cycle trace.
const MAX_CYCLE3_NODES: usize = 2048;

/// k-th cumulant of `Σ f(λ_j)` (scaled eigenvalues in the upper half plane)
/// for the determinantal S-kernel reduction:
/// `Σ_m ((−1)^{m−1}/m) Σ_{k₁+…+k_m=k} (k!/Πk_h!) ∫ Π f^{k_h} S(z₁,z₂)…S(z_m,z₁)`.
pub fn costin_lebowitz_cumulant(ctx: &KernelContext, f: &crate::testfn::TestFunction, k: u32) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::Unsupported(format!("Costin–Lebowitz cumulant of order {k}")));
    }
    if ctx.regime != Regime::ComplexComplex {
        return Err(Error::Domain("Costin–Lebowitz cumulants use the complex/complex kernel".into()));
    }
    if ctx.n > 32 {
        return Err(Error::Unsupported(format!("half dimension {} > 32", ctx.n)));
    }
    let nodes = planar_nodes(ctx, f)?;
    let nf = ctx.n as f64;
    let r = (2.0 * nf).sqrt();
    let pts: Vec<Complex64> = nodes.iter().map(|p| p.0 * r).collect();
    // Measure 2n·w per node so traces become integrals in scaled coordinates.
    let wt: Vec<f64> = nodes.iter().map(|p| 2.0 * nf * p.1).collect();
    let fv: Vec<f64> = nodes.iter().map(|p| p.2).collect();
    let kern = |i: usize, j: usize| s_cc_unchecked(ctx, pts[i], pts[j]);
    let npts = pts.len();

    let cycle1 = |a: u32| -> f64 { (0..npts).map(|i| wt[i] * fv[i].powi(a as i32) * kern(i, i).re).sum() };
    let cycle2 = |a: u32, b: u32| -> f64 {
        let rows: Vec<f64> = (0..npts)
            .into_par_iter()
            .map(|i| {
                let fi = wt[i] * fv[i].powi(a as i32);
                let fib = wt[i] * fv[i].powi(b as i32);
                let mut acc = 0.0;
                for j in 0..=i {
                    let p = (kern(i, j) * kern(j, i)).re;
                    if i == j {
                        acc += fi * wt[j] * fv[j].powi(b as i32) * p;
                    } else {
                        acc += (fi * fv[j].powi(b as i32) + fib * fv[j].powi(a as i32)) * wt[j] * p;
                    }
                }
                acc
            })
            .collect();
        rows.iter().sum()
    };
    let cycle3 = || -> Result<f64> {
        if npts > MAX_CYCLE3_NODES {
            return Err(Error::Unsupported(format!(
                "{npts} quadrature nodes for a three-cycle trace (limit {MAX_CYCLE3_NODES})"
            )));
        }
        let s: Vec<Complex64> = (0..npts * npts).map(|ij| kern(ij / npts, ij % npts)).collect();
        let g: Vec<f64> = (0..npts).map(|i| wt[i] * fv[i]).collect();
        let rows: Vec<Complex64> = (0..npts)
            .into_par_iter()
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..npts {
                    let sij = s[i * npts + j] * g[j];
                    let mut inner = Complex64::new(0.0, 0.0);
                    for l in 0..npts {
                        inner += s[j * npts + l] * g[l] * s[l * npts + i];
                    }
                    acc += sij * inner;
                }
                acc * g[i]
            })
            .collect();
        Ok(rows.iter().sum::<Complex64>().re)
    };

    let mut total = 0.0;
    for parts in compositions(k) {
        let m = parts.len();
        let coef = multinomial(k, &parts)?.to_f64().unwrap_or(f64::NAN);
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        let trace = match parts.as_slice() {
            [a] => cycle1(*a),
            [a, b] => cycle2(*a, *b),
            [1, 1, 1] => cycle3()?,
            _ => unreachable!("compositions of k ≤ 3"),
        };
        total += sign / m as f64 * coef * trace;
    }
    Ok(total)
}
