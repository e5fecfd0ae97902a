mod common;

use common::{assert_close, random_complex};
use ginibre_core::ensembles::{sample_matrix, AtomDistribution, EnsembleSpec};
use ginibre_core::hermitization::*;
use ginibre_core::linalg::{eigenvalues_complex, eigenvalues_hermitian, lu_det, lu_logabsdet, ComplexMatrix};
use ginibre_core::quadrature::{integrate_adaptive, QuadratureOptions};
use ginibre_core::testfn::TestFunction;
use ginibre_core::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ginue(n: usize, seed: u64, idx: u64) -> ComplexMatrix {
    sample_matrix(&EnsembleSpec::new(AtomDistribution::ComplexGaussian, n, seed).unwrap(), idx)
}

/// All roots of a polynomial (highest coefficient first) by Durand–Kerner.
fn poly_roots(coef: &[Complex64]) -> Vec<Complex64> {
    let deg = coef.len() - 1;
    let monic: Vec<Complex64> = coef.iter().map(|a| a / coef[0]).collect();
    let eval = |x: Complex64| monic.iter().fold(c(0.0, 0.0), |acc, &a| acc * x + a);
    let mut r: Vec<Complex64> = (0..deg).map(|k| c(0.4, 0.9).powu(k as u32 + 1)).collect();
    for _ in 0..2000 {
        for i in 0..deg {
            let den: Complex64 = (0..deg).filter(|&j| j != i).map(|j| r[i] - r[j]).product();
            let step = eval(r[i]) / den;
            r[i] -= step;
        }
    }
    r
}

#[test]
fn hermitize_structure() {
    let h = hermitize(&ComplexMatrix::zeros(4, 4), c(0.0, 0.0)).unwrap();
    assert!(h.w.data().iter().all(|v| *v == c(0.0, 0.0)));
    assert!(hermitize(&ComplexMatrix::zeros(2, 3), c(0.0, 0.0)).is_err());

    let m = random_complex(7, 3);
    let h = hermitize(&m, c(0.2, -0.1)).unwrap();
    assert_eq!(h.w.hermitian_defect(), 0.0);
    let e = h.eigenvalues().unwrap();
    for k in 0..7 {
        assert!((e[k] + e[13 - k]).abs() < 1e-12);
    }
}

#[test]
fn positive_spectrum_is_singular_values() {
    let n = 4;
    let z = c(0.3, 0.4);
    let m = random_complex(n, 8);
    let h = hermitize(&m, z).unwrap();
    let mu = h.positive_eigenvalues().unwrap();
    let a = m.shift(z).unwrap();
    let gram = a.adjoint().matmul(&a).unwrap();
    let sv: Vec<f64> = eigenvalues_hermitian(&gram).unwrap().iter().map(|&x| (x / n as f64).sqrt()).collect();
    for (p, q) in mu.iter().zip(&sv) {
        assert!((p - q).abs() <= 1e-9, "{mu:?} vs {sv:?}");
    }
    // Π σ_j = |det(M − z)|.
    let lp: f64 = mu.iter().map(|x| (x * (n as f64).sqrt()).ln()).sum();
    assert!((lp - lu_logabsdet(&a).unwrap()).abs() < 1e-10);
}

#[test]
fn stieltjes_properties() {
    let m = ginue(6, 1, 0);
    let h = hermitize(&m, c(0.1, 0.2)).unwrap();
    assert!(stieltjes(&h, c(0.3, 0.0)).is_err());
    assert!(stieltjes(&h, c(0.3, -1.0)).is_err());
    for eta in [1e-6, 1e-3, 1.0, 100.0] {
        assert!(stieltjes(&h, c(0.0, eta)).unwrap().im > 0.0);
    }
    let zeta = c(0.0, 1e6);
    let v = stieltjes(&h, zeta).unwrap();
    let lead = -2.0 / zeta;
    assert!((v - lead).norm() <= 1e-10 * lead.norm(), "{v} vs {lead}");
    assert!((stieltjes_with(&h, zeta, TraceNormalization::FullDim).unwrap() * 2.0 - v).norm() < 1e-20);
}

#[test]
fn stieltjes_matches_dense_inverse() {
    let n = 6;
    let h = hermitize(&ginue(n, 4, 2), c(-0.2, 0.3)).unwrap();
    let zeta = c(0.15, 0.4);
    let a = h.w.shift(zeta).unwrap();
    let det = lu_det(&a).unwrap();
    // tr A^{-1} = Σ_i det(A with row and column i removed) / det A.
    let mut tr = c(0.0, 0.0);
    for i in 0..2 * n {
        let idx: Vec<usize> = (0..2 * n).filter(|&k| k != i).collect();
        let minor = ComplexMatrix::from_fn(2 * n - 1, 2 * n - 1, |r, s| a[(idx[r], idx[s])]);
        tr += lu_det(&minor).unwrap() / det;
    }
    let v = stieltjes(&h, zeta).unwrap();
    assert!((v - tr / n as f64).norm() <= 1e-10 * v.norm(), "{v} vs {}", tr / n as f64);
}

#[test]
fn girko_basic_cases() {
    let q = QuadratureOptions::default();
    let f = TestFunction::disc_bump(c(0.0, 0.0), 0.5).unwrap();
    let zero = ComplexMatrix::zeros(5, 5);
    for path in [GirkoPath::Spectrum, GirkoPath::Determinant] {
        let v = girko_reconstruct(&f, &zero, None, q, path).unwrap();
        // log|z| is singular at the bump center; the tensor rule resolves it to ~1e-4.
        assert!((v - 5.0).abs() <= 1e-3 * 5.0, "{path:?}: {v}");
        assert_eq!(girko_reconstruct(&f.scaled(0.0), &zero, None, q, path).unwrap(), 0.0);
    }
    assert!(girko_reconstruct(&TestFunction::harmonic(2).unwrap(), &zero, None, q, GirkoPath::Spectrum).is_err());
    assert!(girko_reconstruct(&TestFunction::interval_bump(-0.5, 0.5).unwrap(), &zero, None, q, GirkoPath::Spectrum)
        .is_err());
}

#[test]
fn girko_matches_spectral_sum() {
    let q = QuadratureOptions::default();
    let f = TestFunction::disc_bump(c(0.1, 0.05), 0.6).unwrap();
    for idx in 0..3 {
        let m = ginue(16, 12, idx);
        let s = eigenvalues_complex(&m).unwrap();
        let direct: f64 = s.eigenvalues.iter().map(|z| f.eval_z(*z)).sum();
        let a = girko_reconstruct(&f, &m, Some(&s), q, GirkoPath::Spectrum).unwrap();
        let b = girko_reconstruct(&f, &m, None, q, GirkoPath::Determinant).unwrap();
        assert!((a - direct).abs() <= 1e-3 * direct.abs(), "spectrum path {a} vs {direct}");
        assert!((b - direct).abs() <= 1e-3 * direct.abs(), "determinant path {b} vs {direct}");
        assert!((a - b).abs() <= 1e-8 * direct.abs().max(1.0));
    }
}

#[test]
fn solve_mc_branch_and_residual() {
    assert!(solve_mc(c(1.0, 0.0), c(0.0, 0.0)).is_err());
    for z in [c(0.0, 0.0), c(0.3, 0.0), c(0.5, 0.5), c(1.2, -0.3)] {
        for w in [c(0.5, 1e-6), c(2.0, 0.1), c(-1.0, 0.5), c(3.9, 2.0), c(8.0, 1e-3), c(0.01, 1e-4)] {
            let m = solve_mc(w, z).unwrap();
            assert!(m.im > 0.0);
            assert!(mc_residual(m, w, z).norm() <= 1e-12 * (1.0 + m.norm().recip()), "w={w} z={z} m={m}");
        }
    }
}

#[test]
fn single_stieltjes_root_in_the_bulk() {
    let z = c(0.0, 0.0);
    for k in 1..40 {
        let x = 4.0 * k as f64 / 40.0;
        let w = c(x, 1e-6);
        let zz = z.norm_sqr();
        let roots = poly_roots(&[w, 2.0 * w, w + 1.0 - zz, c(1.0, 0.0)]);
        let up: Vec<&Complex64> = roots.iter().filter(|r| r.im > 1e-8).collect();
        assert_eq!(up.len(), 1, "x={x}: {roots:?}");
        assert!((solve_mc(w, z).unwrap() - up[0]).norm() < 1e-8);
    }
}

#[test]
fn marchenko_pastur_at_the_origin() {
    let (lo, hi) = support_edges(c(0.0, 0.0));
    assert_eq!((lo, hi), (0.0, 4.0));
    for k in 1..50 {
        let x = 4.0 * k as f64 / 50.0;
        let mp = (x * (4.0 - x)).sqrt() / (2.0 * PI * x);
        assert_close(classical_density(x, c(0.0, 0.0)), mp, 1e-10, &format!("x={x}"));
    }
    assert_eq!(classical_density(4.5, c(0.0, 0.0)), 0.0);
    assert_eq!(classical_density(-1.0, c(0.0, 0.0)), 0.0);
}

#[test]
fn finite_eta_density_approaches_the_limit() {
    let z = c(0.3, 0.0);
    for x in [0.5, 1.5, 3.0] {
        let a = density_at_eta(x, z, 1e-6).unwrap();
        let b = classical_density(x, z);
        assert!((a - b).abs() <= 1e-5 * b, "x={x}: {a} vs {b}");
    }
}

#[test]
fn density_mass_and_symmetric_lift() {
    for z in [c(0.0, 0.0), c(0.3, 0.0), c(0.6, 0.6), c(1.5, 0.0)] {
        let (_, hi) = support_edges(z);
        assert!((classical_cdf(hi, z) - 1.0).abs() <= 1e-6, "z={z}");
        // q(t) = |t| p_c(t²) is the symmetric density of the ± singular values.
        for k in 1..30 {
            let t = hi.sqrt() * k as f64 / 30.0;
            let q = |t: f64| t.abs() * classical_density(t * t, z);
            assert!((q(t) - q(-t)).abs() <= 1e-9);
            assert!(q(t) >= 0.0);
        }
    }
    let (lo, hi) = support_edges(c(1.5, 0.0));
    assert!(lo > 0.0 && classical_density(0.5 * lo, c(1.5, 0.0)) == 0.0 && hi > lo);
}

#[test]
fn stieltjes_round_trip() {
    let z = c(0.3, 0.0);
    let (lo, hi) = support_edges(z);
    for w in [c(1.0, 0.5), c(-0.5, 0.3), c(5.0, 0.2), c(2.0, 2.0)] {
        let g = |th: f64, part: usize| {
            let (s, cth) = th.sin_cos();
            let x = lo + (hi - lo) * s * s;
            let v = classical_density(x, z) * 2.0 * (hi - lo) * s * cth / (x - w);
            if part == 0 {
                v.re
            } else {
                v.im
            }
        };
        let re = integrate_adaptive(|t| g(t, 0), 0.0, PI / 2.0, 1e-12).unwrap();
        let im = integrate_adaptive(|t| g(t, 1), 0.0, PI / 2.0, 1e-12).unwrap();
        let m = solve_mc(w, z).unwrap();
        assert!((c(re, im) - m).norm() <= 1e-5, "w={w}: {} vs {m}", c(re, im));
    }
}

#[test]
fn classical_positions_solve_the_quantile_equation() {
    let z = c(0.3, 0.0);
    let n = 64;
    let g = classical_positions(n, z).unwrap();
    assert_eq!(g.len(), n);
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    for (j, &x) in g.iter().enumerate() {
        let r = classical_cdf(x, z) - (j + 1) as f64 / n as f64;
        assert!(r.abs() <= 1e-8, "j={j}: residual {r}");
    }
    assert!(classical_positions(0, z).is_err());
}

#[test]
fn sampled_quantiles_track_classical_positions() {
    let n = 256;
    let z = c(0.3, 0.0);
    let g = classical_positions(n, z).unwrap();
    let h = hermitize(&ginue(n, 31, 0), z).unwrap();
    let lam: Vec<f64> = h.positive_eigenvalues().unwrap().iter().map(|mu| n as f64 * mu * mu).collect();
    assert!(lam.windows(2).all(|w| w[1] >= w[0]));
    // Deviation in quantile units: |F_c(λ_j) − F_c(γ_j)| with F_c(γ_j) = j/N.
    let dev = lam
        .iter()
        .enumerate()
        .map(|(j, &l)| (classical_cdf(l, z) - (j + 1) as f64 / n as f64).abs())
        .fold(0.0, f64::max);
    assert!(dev <= 0.05, "max quantile deviation {dev}");
    assert!(g.iter().all(|&x| classical_cdf(x, z) > 0.0));
}

#[test]
fn profile_and_csv() {
    let p = ClassicalProfile::new(c(0.3, 0.0), 200, 16).unwrap();
    assert!(p.density.iter().all(|&d| d >= 0.0));
    assert!(p.positions.windows(2).all(|w| w[1] > w[0]));
    let csv = p.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,p_c");
    assert_eq!(lines[201], "j,gamma_j");
    assert_eq!(lines.len(), 218);
    assert!(lines[202].starts_with("1,"));
}

#[test]
fn rigidity_cases() {
    let g = classical_positions(8, c(0.2, 0.0)).unwrap();
    assert_eq!(rigidity_from(&g, &g).unwrap().value, 0.0);
    let mut lam = g.clone();
    lam[0] = 0.0;
    let r = rigidity_from(&lam, &g).unwrap();
    assert_eq!(r.excluded, 1);
    assert!(rigidity_from(&g[..3], &g).is_err());
    assert!(rigidity_diagnostic(&ginue(8, 1, 0), c(0.9, 0.0)).is_err());
}

#[test]
fn rigidity_grows_sublinearly() {
    let z = c(0.3, 0.0);
    let median = |n: usize| {
        let mut v: Vec<f64> = (0..100)
            .map(|i| {
                let r = rigidity_diagnostic(&ginue(n, 40, i), z).unwrap();
                assert!(r.value.is_finite());
                r.value.abs()
            })
            .collect();
        v.sort_by(f64::total_cmp);
        0.5 * (v[49] + v[50])
    };
    let (m32, m128) = (median(32), median(128));
    assert!(m128 < 4.0 * m32, "median |value|: n=32 {m32}, n=128 {m128}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mc_branch_has_positive_imaginary_part(x in -6.0f64..10.0, eta in 1e-6f64..5.0, zr in 0.0f64..1.4, zi in -1.0f64..1.0) {
        let (w, z) = (c(x, eta), c(zr, zi));
        let m = solve_mc(w, z).unwrap();
        prop_assert!(m.im > 0.0);
        prop_assert!(mc_residual(m, w, z).norm() <= 1e-10 * (1.0 + m.norm().recip()));
    }

    #[test]
    fn hermitized_spectrum_is_symmetric(seed in any::<u64>(), n in 2usize..10, zr in -1.0f64..1.0, zi in -1.0f64..1.0) {
        let h = hermitize(&random_complex(n, seed), c(zr, zi)).unwrap();
        let e = h.eigenvalues().unwrap();
        for k in 0..n {
            prop_assert!((e[k] + e[2 * n - 1 - k]).abs() <= 1e-10);
        }
    }
}
