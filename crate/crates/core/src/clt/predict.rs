//! Limiting-variance functionals.

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, tensor_rule, CompositeRule, QuadratureOptions};
use crate::testfn::TestFunction;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Trapezoid nodes on the unit circle for boundary Fourier coefficients.
const CIRCLE_NODES: usize = 512;
/// Fourier modes kept in the boundary term.
const MAX_MODE: i64 = 64;

/// `∫ |∇f|² dx dy`: tensor Gauss–Legendre over the support's bounding box
/// for bumps, polar Gauss–Legendre × trapezoid over the unit disc for
/// harmonic polynomials.
pub fn dirichlet_energy(f: &TestFunction, quad: QuadratureOptions) -> Result<f64> {
    let g2 = |x: f64, y: f64| {
        let (gx, gy) = f.gradient(x, y);
        gx * gx + gy * gy
    };
    match f {
        TestFunction::DiscBump { .. } | TestFunction::UpperHalfBump { .. } => {
            let (bx, by) = f.bounding_box();
            Ok(tensor_rule(bx, by, quad).iter().map(|&(x, y, w)| w * g2(x, y)).sum())
        }
        TestFunction::HarmonicPolynomial { .. } => {
            let radial = CompositeRule::new(0.0, 1.0, quad.panels, quad.order);
            let dt = 2.0 * PI / CIRCLE_NODES as f64;
            let mut total = 0.0;
            for (&r, &w) in radial.nodes.iter().zip(&radial.weights) {
                let ring: f64 = (0..CIRCLE_NODES)
                    .map(|k| {
                        let (s, c) = (k as f64 * dt).sin_cos();
                        g2(r * c, r * s)
                    })
                    .sum();
                total += w * r * ring * dt;
            }
            Ok(total)
        }
        TestFunction::IntervalBump { .. } => Err(Error::Unsupported(format!("planar energy of {f}"))),
    }
}

/// `(1/4π) ∫ |∇f|²` for an upper-half-plane bump.
pub fn predict_bulk_variance(f: &TestFunction) -> Result<f64> {
    if !matches!(f, TestFunction::UpperHalfBump { .. }) {
        return Err(Error::Unsupported(format!("bulk variance needs an upper-half bump, got {f}")));
    }
    Ok(dirichlet_energy(f, QuadratureOptions::default())? / (4.0 * PI))
}

/// `(2 − √2)/√π`.
pub fn line_variance_constant() -> f64 {
    (2.0 - 2f64.sqrt()) / PI.sqrt()
}

/// `((2 − √2)/√π) ∫ f(x)² dx` for an interval bump in (−1, 1).
pub fn predict_line_variance(f: &TestFunction) -> Result<f64> {
    let TestFunction::IntervalBump { a, b, .. } = *f else {
        return Err(Error::Unsupported(format!("line variance needs an interval bump, got {f}")));
    };
    let l2 = integrate_adaptive(|x| f.eval(x, 0.0).powi(2), a, b, 1e-13)?;
    Ok(line_variance_constant() * l2)
}

/// `f̂_k = (1/2π) ∫ f(e^{iθ}) e^{−ikθ} dθ` for `|k| ≤ max_mode`, by the
/// trapezoid rule; index `k + max_mode`.
pub fn fourier_coefficients(f: &TestFunction, nodes: usize, max_mode: i64) -> Vec<Complex64> {
    let dt = 2.0 * PI / nodes as f64;
    let vals: Vec<f64> = (0..nodes)
        .map(|j| {
            let (s, c) = (j as f64 * dt).sin_cos();
            f.eval(c, s)
        })
        .collect();
    (-max_mode..=max_mode)
        .map(|k| {
            vals.iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -(k as f64) * j as f64 * dt))
                .sum::<Complex64>()
                / nodes as f64
        })
        .collect()
}

/// Bulk and boundary variance components for the complex Ginibre ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GinueVariance {
    /// `(1/4π) ∫_D |∇f|²`.
    pub sigma_a2: f64,
    /// `½ Σ_k |k| |f̂_k|²`.
    pub sigma_b2: f64,
}

impl GinueVariance {
    pub fn total(&self) -> f64 {
        self.sigma_a2 + self.sigma_b2
    }
}

pub fn predict_ginue_variance(f: &TestFunction) -> Result<GinueVariance> {
    if f.is_line() {
        return Err(Error::Unsupported(format!("{f} is not defined on the disc")));
    }
    let sigma_a2 = dirichlet_energy(f, QuadratureOptions::default())? / (4.0 * PI);
    let coef = fourier_coefficients(f, CIRCLE_NODES, MAX_MODE);
    let sigma_b2 = 0.5
        * coef.iter().enumerate().map(|(i, c)| (i as i64 - MAX_MODE).unsigned_abs() as f64 * c.norm_sqr()).sum::<f64>();
    Ok(GinueVariance { sigma_a2, sigma_b2 })
}
