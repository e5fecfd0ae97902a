//! Hermitized matrices `W_n(z)`, Stieltjes transforms, the self-consistent
//! equation for `m_c`, its density and classical positions.

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_hermitian, lu_logabsdet, ComplexMatrix, Spectrum};
use crate::quadrature::{integrate_adaptive, tensor_rule, QuadratureOptions};
use crate::testfn::TestFunction;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `W = [[0, M − z], [(M − z)*, 0]] / √n` for an n×n matrix `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitizedMatrix {
    pub n: usize,
    pub z: Complex64,
    pub w: ComplexMatrix,
}

impl HermitizedMatrix {
    /// Ascending eigenvalues of `W`.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues_hermitian(&self.w)
    }

    /// The n nonnegative eigenvalues `μ_1 ≤ … ≤ μ_n` of `W`: singular values
    /// of `(M − z)/√n`.
    pub fn positive_eigenvalues(&self) -> Result<Vec<f64>> {
        let e = self.eigenvalues()?;
        Ok(e[self.n..].iter().map(|&x| x.max(0.0)).collect())
    }
}

pub fn hermitize(m: &ComplexMatrix, z: Complex64) -> Result<HermitizedMatrix> {
    let n = m.require_square()?;
    let s = 1.0 / (n as f64).sqrt();
    let mut w = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let mut a = m[(i, j)];
            if i == j {
                a -= z;
            }
            w[(i, n + j)] = a * s;
            w[(n + j, i)] = a.conj() * s;
        }
    }
    let h = HermitizedMatrix { n, z, w };
    if cfg!(debug_assertions) && n <= 128 {
        let e = h.eigenvalues()?;
        let scale = e.iter().map(|x| x.abs()).fold(1.0, f64::max);
        for k in 0..n {
            debug_assert!((e[k] + e[2 * n - 1 - k]).abs() <= 1e-9 * scale, "spectrum of W not symmetric");
        }
    }
    Ok(h)
}

/// Normalization of the resolvent trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceNormalization {
    /// `(1/n) tr (W − ζ)^{-1}` for the 2n×2n matrix `W`.
    #[default]
    BaseDim,
    /// `(1/(2n)) tr (W − ζ)^{-1}`.
    FullDim,
}

/// Stieltjes transform `(1/n) Σ_k 1/(μ_k − ζ)` over all 2n eigenvalues of `W`.
pub fn stieltjes(w: &HermitizedMatrix, zeta: Complex64) -> Result<Complex64> {
    stieltjes_with(w, zeta, TraceNormalization::BaseDim)
}

pub fn stieltjes_with(w: &HermitizedMatrix, zeta: Complex64, norm: TraceNormalization) -> Result<Complex64> {
    if zeta.im.is_nan() || zeta.im <= 0.0 {
        return Err(Error::Domain(format!("Stieltjes transform needs Im ζ > 0, got {zeta}")));
    }
    let mu = w.eigenvalues()?;
    let sum: Complex64 = mu.iter().map(|&m| 1.0 / (m - zeta)).sum();
    let d = match norm {
        TraceNormalization::BaseDim => w.n,
        TraceNormalization::FullDim => 2 * w.n,
    };
    Ok(sum / d as f64)
}

/// How `log|Π_j (z − λ_j)|` is evaluated inside the Girko integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GirkoPath {
    /// `Σ_j log|z − λ_j|` from a precomputed spectrum.
    Spectrum,
    /// `log|det(M − z)|` by LU at every node.
    Determinant,
}

/// `(1/2π) ∫ Δf(z) log|Π_j(z − λ_j)| d²z` by tensor Gauss–Legendre over the
/// bounding box of `supp f`.
pub fn girko_reconstruct(
    f: &TestFunction,
    m: &ComplexMatrix,
    spectrum: Option<&Spectrum>,
    quad: QuadratureOptions,
    path: GirkoPath,
) -> Result<f64> {
    m.require_square()?;
    if !f.is_compact() || f.is_line() {
        return Err(Error::Support(format!("{f} is not a compactly supported planar function")));
    }
    let (bx, by) = f.bounding_box();
    let pts = tensor_rule(bx, by, quad);
    let owned;
    let spec = match (path, spectrum) {
        (GirkoPath::Spectrum, Some(s)) => Some(s),
        (GirkoPath::Spectrum, None) => {
            owned = crate::linalg::eigenvalues_complex(m)?;
            Some(&owned)
        }
        (GirkoPath::Determinant, _) => None,
    };
    let terms: Vec<f64> = pts
        .par_iter()
        .map(|&(x, y, wgt)| {
            let lap = f.laplacian(x, y);
            if lap == 0.0 {
                return 0.0;
            }
            let z = Complex64::new(x, y);
            let l = match spec {
                Some(s) => s.eigenvalues.iter().map(|&lam| (z - lam).norm().ln()).sum::<f64>(),
                None => lu_logabsdet(&m.shift(z).expect("square")).unwrap_or(f64::NAN),
            };
            wgt * lap * l
        })
        .collect();
    Ok(terms.iter().sum::<f64>() / (2.0 * PI))
}

/// Coefficients `(c3, c2, c1, c0)` of the cubic in `m` equivalent to
/// `m^{-1} = −w(1 + m) + |z|²(1 + m)^{-1}`.
fn mc_cubic(w: Complex64, z: Complex64) -> [Complex64; 4] {
    let z2 = z.norm_sqr();
    [w, 2.0 * w, w + 1.0 - z2, Complex64::new(1.0, 0.0)]
}

/// Residual `m^{-1} + w(1 + m) − |z|²(1 + m)^{-1}`.
pub fn mc_residual(m: Complex64, w: Complex64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    one / m + w * (one + m) - z.norm_sqr() / (one + m)
}

/// Roots of `c3 m³ + c2 m² + c1 m + c0` (c3 ≠ 0), Newton-polished.
fn cubic_roots(c: [Complex64; 4]) -> [Complex64; 3] {
    let [c3, c2, c1, c0] = c;
    let (a, b, cc) = (c2 / c3, c1 / c3, c0 / c3);
    // Depressed cubic t³ + p t + q with m = t − a/3.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u3 = -q / 2.0 + disc;
    if u3.norm() < (-q / 2.0 - disc).norm() {
        u3 = -q / 2.0 - disc;
    }
    let omega = Complex64::new(-0.5, 0.75f64.sqrt());
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    let u = u3.powf(1.0 / 3.0);
    for (k, r) in roots.iter_mut().enumerate() {
        let uk = u * omega.powu(k as u32);
        let t = if uk.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { uk - p / (3.0 * uk) };
        *r = t - a / 3.0;
    }
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let f = ((c3 * *r + c2) * *r + c1) * *r + c0;
            let df = (3.0 * c3 * *r + 2.0 * c2) * *r + c1;
            if df.norm() == 0.0 {
                break;
            }
            let step = f / df;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm() {
                break;
            }
        }
    }
    roots
}

/// The Stieltjes-branch root (Im m > 0) of the self-consistent equation.
pub fn solve_mc(w: Complex64, z: Complex64) -> Result<Complex64> {
    if w.im.is_nan() || w.im <= 0.0 {
        return Err(Error::Domain(format!("solve_mc needs Im w > 0, got {w}")));
    }
    let roots = cubic_roots(mc_cubic(w, z));
    roots
        .iter()
        .copied()
        .filter(|r| r.im > 0.0)
        .max_by(|a, b| a.im.total_cmp(&b.im))
        .ok_or_else(|| Error::Domain(format!("no root with Im m > 0 at w = {w}, z = {z}")))
}

/// Density from `Im m_c(x + iη)/π` at a finite `η`.
pub fn density_at_eta(x: f64, z: Complex64, eta: f64) -> Result<f64> {
    Ok((solve_mc(Complex64::new(x, eta), z)?.im / PI).max(0.0))
}

/// `p_c(x, z)`: the η → 0⁺ limit of `Im m_c(x + iη, z)/π`, taken from the
/// real-coefficient cubic at `w = x`. Zero outside the support.
pub fn classical_density(x: f64, z: Complex64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let roots = cubic_roots(mc_cubic(Complex64::new(x, 0.0), z));
    let im = roots.iter().map(|r| r.im.abs()).fold(0.0, f64::max);
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    if im <= 1e-12 * scale {
        0.0
    } else {
        im / PI
    }
}

/// Support `[λ−, λ+]` of `p_c(·, z)`.
pub fn support_edges(z: Complex64) -> (f64, f64) {
    let r2 = z.norm_sqr();
    let s = 1.0 - r2;
    // Discriminant of the cubic in m vanishes at the edges:
    // 4|z|² w² + (36 s − 8 s² − 27) w − 4 s³ = 0.
    let a = 4.0 * r2;
    let b = 36.0 * s - 8.0 * s * s - 27.0;
    let c = -4.0 * s * s * s;
    if a == 0.0 {
        return (0.0, -c / b);
    }
    let d = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let q = -0.5 * (b + b.signum() * d);
    let (r1, r2) = (q / a, c / q);
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    if s > 0.0 {
        (0.0, hi)
    } else {
        (lo.max(0.0), hi)
    }
}

/// `∫_{λ−}^{x} p_c(t, z) dt`, with `t = λ− + (λ+ − λ−) sin²θ` removing the
/// edge singularities.
pub fn classical_cdf(x: f64, z: Complex64) -> f64 {
    let (lo, hi) = support_edges(z);
    if x <= lo {
        return 0.0;
    }
    let xc = x.min(hi);
    let width = hi - lo;
    let theta = ((xc - lo) / width).sqrt().clamp(0.0, 1.0).asin();
    let g = |th: f64| {
        let (s, c) = th.sin_cos();
        classical_density(lo + width * s * s, z) * 2.0 * width * s * c
    };
    integrate_adaptive(g, 0.0, theta, 1e-13).unwrap_or(f64::NAN)
}

/// Tabulated density and classical positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalProfile {
    pub z: Complex64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub positions: Vec<f64>,
}

impl ClassicalProfile {
    pub fn new(z: Complex64, grid_points: usize, positions_n: usize) -> Result<Self> {
        let (lo, hi) = support_edges(z);
        let grid: Vec<f64> = (0..grid_points).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / grid_points as f64).collect();
        let density = grid.iter().map(|&x| classical_density(x, z)).collect();
        Ok(Self { z, grid, density, positions: classical_positions(positions_n, z)? })
    }

    /// CSV: "x,p_c" rows followed by "j,gamma_j" rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,p_c\n");
        for (x, p) in self.grid.iter().zip(&self.density) {
            s.push_str(&format!("{x:.12e},{p:.12e}\n"));
        }
        s.push_str("j,gamma_j\n");
        for (j, g) in self.positions.iter().enumerate() {
            s.push_str(&format!("{},{g:.12e}\n", j + 1));
        }
        s
    }
}

/// `γ_j(z)`, j = 1..=N, solving `CDF(γ_j) = j/N` by bisection in the
/// angular variable.
pub fn classical_positions(n: usize, z: Complex64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("need N ≥ 1".into()));
    }
    let (lo, hi) = support_edges(z);
    let width = hi - lo;
    let total = classical_cdf(hi, z);
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!("density mass {total} differs from 1")));
    }
    let at = |th: f64| lo + width * th.sin().powi(2);
    let mut out = Vec::with_capacity(n);
    let mut a = 0.0;
    for j in 1..=n {
        let target = j as f64 / n as f64;
        if j == n {
            out.push(hi);
            break;
        }
        let (mut l, mut r) = (a, std::f64::consts::FRAC_PI_2);
        for _ in 0..200 {
            let mid = 0.5 * (l + r);
            if classical_cdf(at(mid), z) < target {
                l = mid;
            } else {
                r = mid;
            }
            if r - l < 1e-15 {
                break;
            }
        }
        a = 0.5 * (l + r);
        out.push(at(a));
    }
    Ok(out)
}

/// Rigidity diagnostic output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RigidityReport {
    /// `Σ_j (log λ_j − log γ_j)` over the included eigenvalues.
    pub value: f64,
    /// Eigenvalues dropped because they were exactly zero.
    pub excluded: usize,
}

/// Compares the eigenvalues of `(M − z)*(M − z)`, i.e. `n·μ_j²` for the
/// positive eigenvalues `μ_j` of `W_n(z)`, with `γ_j(z)` by rank.
pub fn rigidity_diagnostic(m: &ComplexMatrix, z: Complex64) -> Result<RigidityReport> {
    if z.norm() > 0.8 {
        return Err(Error::Domain(format!("rigidity diagnostic is bulk-only, |z| = {}", z.norm())));
    }
    let h = hermitize(m, z)?;
    let n = h.n as f64;
    let lambdas: Vec<f64> = h.positive_eigenvalues()?.iter().map(|mu| n * mu * mu).collect();
    let gammas = classical_positions(h.n, z)?;
    rigidity_from(&lambdas, &gammas)
}

/// Rank-paired log deviation of sorted `lambdas` from `gammas`.
pub fn rigidity_from(lambdas: &[f64], gammas: &[f64]) -> Result<RigidityReport> {
    if lambdas.len() != gammas.len() {
        return Err(Error::DimensionMismatch(format!("{} eigenvalues, {} positions", lambdas.len(), gammas.len())));
    }
    let mut value = 0.0;
    let mut excluded = 0;
    for (&l, &g) in lambdas.iter().zip(gammas) {
        if l <= 0.0 {
            excluded += 1;
        } else {
            value += l.ln() - g.ln();
        }
    }
    Ok(RigidityReport { value, excluded })
}
