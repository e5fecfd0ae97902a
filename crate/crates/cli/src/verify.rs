//! Exact-identity suites behind `verify`.

use crate::config::Suite;
use ginibre_core::clt::{compositions, identity_a, identity_b, multinomial};
use ginibre_core::ensembles::{sample_matrix, sample_real_matrix, AtomDistribution, EnsembleSpec};
use ginibre_core::kernels::{expected_real_count, s2n};
use ginibre_core::linalg::{eigenvalues_complex, eigenvalues_hermitian, eigenvalues_real, lu_det, ComplexMatrix};
use ginibre_core::quatpfaff::*;
use ginibre_core::special::{erfcx, ln_factorial, lower_incomplete_gamma, scaled_exp_partial_naive};
use ginibre_core::{Complex64, Result};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// One checked identity: `pass` iff `error ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), error, tolerance, pass: error <= tolerance }
    }

    fn exact(name: impl Into<String>, holds: bool) -> Self {
        Self::new(name, if holds { 0.0 } else { 1.0 }, 0.0)
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn gaussian_entries(n: usize, seed: u64, index: u64) -> Result<ComplexMatrix> {
    Ok(sample_matrix(&EnsembleSpec::new(AtomDistribution::ComplexGaussian, n.max(2), seed)?, index))
}

fn random_skew(n: usize, seed: u64, index: u64) -> Result<ComplexMatrix> {
    let m = gaussian_entries(n, seed, index)?;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(i, j)] - m[(j, i)]))
}

fn random_self_dual(n: usize, seed: u64, index: u64) -> Result<QuaternionMatrix> {
    // Four independent entry matrices supply the quaternion components.
    let parts: Vec<ComplexMatrix> = (0..4).map(|k| gaussian_entries(n, seed, 4 * index + k)).collect::<Result<_>>()?;
    let q =
        |i: usize, j: usize| Quaternion::new(parts[0][(i, j)], parts[1][(i, j)], parts[2][(i, j)], parts[3][(i, j)]);
    Ok(QuaternionMatrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => Quaternion::scalar(parts[0][(i, i)]),
        std::cmp::Ordering::Less => q(i, j),
        std::cmp::Ordering::Greater => q(j, i).dual(),
    }))
}

/// Largest distance under a greedy nearest-neighbor matching.
fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, &y)| (k, (x - y).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

fn pfaffian_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in (2..=16).step_by(2) {
        let mut worst_det = 0.0f64;
        let mut worst_sum = 0.0f64;
        for i in 0..3 {
            let a = random_skew(n, seed, i)?;
            let pf = pfaffian(&a)?;
            worst_det = worst_det.max(rel(pf * pf, lu_det(&a)?));
            if n <= 8 {
                worst_sum = worst_sum.max(rel(pf, pfaffian_permutation_sum(&a)?));
            }
        }
        out.push(Check::new(format!("Pf^2 = det, dim {n}"), worst_det, 1e-10));
        if n <= 8 {
            out.push(Check::new(format!("Parlett-Reid = permutation sum, dim {n}"), worst_sum, 1e-10));
        }
    }
    let m2 = random_skew(2, seed, 100)?;
    out.push(Check::exact("2x2 closed form", pfaffian(&m2)? == m2[(0, 1)]));
    let m4 = random_skew(4, seed, 101)?;
    let expect = m4[(0, 1)] * m4[(2, 3)] - m4[(0, 2)] * m4[(1, 3)] + m4[(1, 2)] * m4[(0, 3)];
    out.push(Check::exact("4x4 closed form", pfaffian(&m4)? == expect));
    Ok(out)
}

fn quaternion_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 1..=5 {
        let mut worst = 0.0f64;
        let mut vector = 0.0f64;
        for i in 0..3 {
            let q = random_self_dual(n, seed, i)?;
            let md = moore_dyson_det(&q)?;
            worst = worst.max(rel(md, det_via_pfaffian(&q)?));
            let full = cycle_expansion(&q);
            vector = vector.max(full.vector_norm() / md.norm().max(1.0));
        }
        out.push(Check::new(format!("Moore-Dyson = Pf(Z phi(Q)), n {n}"), worst, 1e-10));
        out.push(Check::new(format!("cycle expansion is scalar, n {n}"), vector, 1e-10));
    }
    let m = gaussian_entries(8, seed, 200)?;
    let mut worst = 0.0f64;
    let mut duality = true;
    for k in 0..8 {
        let a = Quaternion::new(m[(k, 0)], m[(k, 1)], m[(k, 2)], m[(k, 3)]);
        let b = Quaternion::new(m[(k, 4)], m[(k, 5)], m[(k, 6)], m[(k, 7)]);
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        let prod = quat_mul(a, b).to_matrix();
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((prod[i][j] - (ma[i][0] * mb[0][j] + ma[i][1] * mb[1][j])).norm());
            }
        }
        duality &= quat_dual(quat_dual(a)) == a;
    }
    out.push(Check::new("product matches the 2x2 embedding", worst, 1e-14));
    out.push(Check::exact("dual is an involution", duality));
    out.push(Check::exact(
        "phi(I) = I",
        phi(&QuaternionMatrix::identity(3)).max_abs_diff(&ComplexMatrix::identity(6)) == 0.0,
    ));
    Ok(out)
}

fn combinatorics_suite() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 2..=12 {
        out.push(Check::exact(format!("a_{n} = 0"), identity_a(n)?.is_zero()));
    }
    for n in 3..=12 {
        out.push(Check::exact(format!("b_{n} = 0"), identity_b(n)?.is_zero()));
    }
    let b2 = identity_b(2)?;
    out.push(Check::exact("b_2 = -2", b2.is_integer() && b2.to_integer().to_i64() == Some(-2)));
    out.push(Check::exact(
        "C(64, 32) = 1832624140942590534",
        multinomial(64, &[32, 32])?.to_u64() == Some(1_832_624_140_942_590_534),
    ));
    out.push(Check::exact("compositions of 6 number 32", compositions(6).len() == 32));
    Ok(out)
}

fn specialfn_suite() -> Result<Vec<Check>> {
    let mut out = vec![
        Check::new("erfcx(0) = 1", (erfcx(0.0) - 1.0).abs(), 1e-15),
        Check::new("erfcx(1)", (erfcx(1.0) / 0.427_583_576_155_807 - 1.0).abs(), 1e-13),
        Check::new("erfcx(30) asymptotic", (erfcx(30.0) / 0.018_795_888_861_416_75 - 1.0).abs(), 1e-13),
        Check::new("ln 20!", (ln_factorial(20) - (2_432_902_008_176_640_000f64).ln()).abs(), 1e-12),
    ];
    let mut worst = 0.0f64;
    for &x in &[0.5, 2.0, 10.0] {
        worst = worst.max((lower_incomplete_gamma(1.0, x)? / (1.0 - (-x).exp()) - 1.0).abs());
    }
    out.push(Check::new("gamma(1, x) = 1 - exp(-x)", worst, 1e-13));
    let mut worst = 0.0f64;
    for n in [2usize, 5, 10] {
        for &u in &[Complex64::new(0.7, 0.0), Complex64::new(1.5, -2.0), Complex64::new(6.0, 3.0)] {
            let naive = scaled_exp_partial_naive((2 * n - 2) as u64, u);
            worst = worst.max(rel(s2n(n, u, true), naive));
        }
    }
    out.push(Check::new("s_2n against the plain sum", worst, 1e-12));
    let sqrt2 = std::f64::consts::SQRT_2;
    out.push(Check::new("E_2 = sqrt 2", (expected_real_count(1)? / sqrt2 - 1.0).abs(), 1e-10));
    out.push(Check::new("E_4 = 11 sqrt 2 / 8", (expected_real_count(2)? / (11.0 * sqrt2 / 8.0) - 1.0).abs(), 1e-10));
    Ok(out)
}

fn eigensolver_suite(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &n in &[12usize, 33, 64] {
        let spec = EnsembleSpec::new(AtomDistribution::RealGaussian, n, seed)?;
        let real = eigenvalues_real(sample_real_matrix(&spec, 0)?, n)?;
        let m = sample_matrix(&spec, 0);
        let cplx = eigenvalues_complex(&m)?;
        out.push(Check::new(
            format!("real Schur = complex QR, dim {n}"),
            multiset_distance(&real.eigenvalues, &cplx.eigenvalues),
            1e-8,
        ));
        out.push(Check::new(format!("trace residual, dim {n}"), real.trace_residual.max(cplx.trace_residual), 1e-12));
        let prod: Complex64 = cplx.eigenvalues.iter().product();
        out.push(Check::new(format!("eigenvalue product = det, dim {n}"), rel(prod, lu_det(&m)?), 1e-8));
        let conj = real
            .iter()
            .all(|(z, is_real)| if is_real { z.im == 0.0 } else { real.eigenvalues.iter().any(|w| *w == z.conj()) });
        out.push(Check::exact(format!("real spectrum is conjugation closed, dim {n}"), conj));
    }
    let g = gaussian_entries(24, seed, 1)?;
    let h = ComplexMatrix::from_fn(24, 24, |i, j| g[(i, j)] + g[(j, i)].conj());
    let herm: Vec<Complex64> = eigenvalues_hermitian(&h)?.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    let d = multiset_distance(&eigenvalues_complex(&h)?.eigenvalues, &herm);
    out.push(Check::new("Hermitian solver = complex QR", d, 1e-9));
    Ok(out)
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<Check>> {
    match suite {
        Suite::Pfaffian => pfaffian_suite(seed),
        Suite::Quaternion => quaternion_suite(seed),
        Suite::Combinatorics => combinatorics_suite(),
        Suite::Specialfn => specialfn_suite(),
        Suite::Eigensolver => eigensolver_suite(seed),
    }
}
