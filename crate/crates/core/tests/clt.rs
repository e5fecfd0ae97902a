mod common;

use common::assert_close;
use ginibre_core::clt::*;
use ginibre_core::ensembles::{sample_matrix, AtomDistribution, EnsembleSpec};
use ginibre_core::kernels::{complex_density_scaled, finite_n_variance_terms, KernelContext, Regime};
use ginibre_core::linalg::{eigenvalues_complex, ComplexMatrix};
use ginibre_core::quadrature::{tensor_rule, QuadratureOptions};
use ginibre_core::testfn::TestFunction;
use ginibre_core::Complex64;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn normals(count: usize, seed: u64) -> Vec<f64> {
    let mut r = common::rng(seed);
    (0..count)
        .map(|_| {
            let u1: f64 = 1.0 - r.gen::<f64>();
            let u2: f64 = r.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        })
        .collect()
}

fn bulk() -> TestFunction {
    TestFunction::upper_half_bump(c(0.0, 0.5), 0.2).unwrap()
}

#[test]
fn multinomial_values() {
    assert_eq!(multinomial(4, &[2, 1, 1]).unwrap(), BigUint::from(12u32));
    assert_eq!(multinomial(9, &[9]).unwrap(), BigUint::one());
    assert_eq!(multinomial(6, &[1, 2, 3]).unwrap(), multinomial(6, &[3, 1, 2]).unwrap());
    assert!(multinomial(5, &[2, 2]).is_err());
    assert!(multinomial(2, &[2, 0]).is_err());
    let big = multinomial(64, &[32, 32]).unwrap();
    assert_eq!(big.to_string(), "1832624140942590534");
}

#[test]
fn composition_identities_are_exact() {
    assert_eq!(identity_a(1).unwrap(), BigRational::one());
    for n in 2..=12 {
        assert!(identity_a(n).unwrap().is_zero(), "a_{n}");
    }
    assert_eq!(identity_b(2).unwrap(), BigRational::from_integer((-2).into()));
    for n in 3..=12 {
        assert!(identity_b(n).unwrap().is_zero(), "b_{n}");
    }
    assert!(identity_a(0).is_err());
    assert!(identity_b(17).is_err());
    assert_eq!(compositions(6).len(), 32);
}

#[test]
fn k_statistics_by_hand() {
    let r = k_statistics(&[1.0, 2.0, 3.0], 3).unwrap();
    assert_eq!(r.kappa, vec![2.0, 1.0, 0.0]);
    let r = k_statistics(&[4.25; 50], 6).unwrap();
    assert_eq!(r.kappa[0], 4.25);
    assert!(r.kappa[1..].iter().all(|&k| k == 0.0));
    assert_eq!(r.se_k2, Some(0.0));
    assert!(k_statistics(&[1.0, 2.0], 4).is_err());
    assert!(k_statistics(&[1.0, 2.0, 3.0], 7).is_err());
    assert!(k_statistics(&[1.0, f64::NAN, 3.0], 2).is_err());
}

#[test]
fn k_statistics_match_fisher_on_known_data() {
    // Exact values from central moments: k₃ = n²m₃/((n−1)(n−2)),
    // k₄ = n²((n+1)m₄ − 3(n−1)m₂²)/((n−1)(n−2)(n−3)).
    let r = k_statistics(&[0.0, 0.0, 0.0, 1.0, 5.0], 4).unwrap();
    assert_close(r.kappa[2], 20.7, 1e-12, "k3");
    assert_close(r.kappa[3], 91.7, 1e-12, "k4");
}

#[test]
fn normals_have_vanishing_higher_cumulants() {
    let x = normals(100_000, 11);
    let r = k_statistics(&x, 6).unwrap();
    assert!(r.kappa[2].abs() <= 4.0 * r.se_k3.unwrap());
    assert!(r.kappa[3].abs() <= 4.0 * r.se_k4.unwrap());
    assert!((r.kappa[1] - 1.0).abs() <= 4.0 * r.se_k2.unwrap());
}

#[test]
fn normality_report_detects_skew() {
    let x: Vec<f64> = normals(4000, 3).iter().map(|v| 2.0 * v).collect();
    let rep = normality_report(&k_statistics(&x, 4).unwrap(), 4.0, 0.1).unwrap();
    assert!(rep.pass, "{rep:?}");
    let mut r = common::rng(4);
    let e: Vec<f64> = (0..4000).map(|_| -(1.0 - r.gen::<f64>()).ln()).collect();
    let rep = normality_report(&k_statistics(&e, 4).unwrap(), 1.0, 0.5).unwrap();
    assert!(!rep.kappa3_ok && !rep.pass, "{rep:?}");
    assert!(normality_report(&CumulantReport::default(), 1.0, 0.1).is_err());
    assert!(normality_report(&k_statistics(&x[..999], 4).unwrap(), 4.0, 0.1).is_err());
}

#[test]
fn linear_statistic_basics() {
    let f = bulk();
    let one = eigenvalues_complex(&ComplexMatrix::from_diag(&[c(0.0, 0.5)])).unwrap();
    assert_eq!(linear_statistic(&f, &one, Normalization::None), 1.0);
    assert_eq!(linear_statistic(&f.scaled(0.0), &one, Normalization::None), 0.0);
    assert_eq!(Normalization::QuarterHalfDim.factor(32), 0.5);
    assert_eq!(Normalization::QuarterFullDim.factor(16), 0.5);
}

#[test]
fn re_z_statistic_is_the_trace() {
    let f = TestFunction::harmonic(1).unwrap();
    for atom in AtomDistribution::ALL {
        let spec = EnsembleSpec::new(atom, 40, 9).unwrap();
        for i in 0..5 {
            let m = sample_matrix(&spec, i);
            let s = sample_spectrum(&spec, i).unwrap();
            let v = linear_statistic(&f, &s, Normalization::None);
            assert!((v - m.trace().re).abs() <= 1e-9, "{atom}: {v} vs {}", m.trace().re);
        }
    }
}

#[test]
fn batches_are_deterministic_and_ordered() {
    let spec = EnsembleSpec::new(AtomDistribution::RealGaussian, 24, 5).unwrap();
    let f = TestFunction::interval_bump(-0.5, 0.5).unwrap();
    let a = run_batch(&spec, &f, 32, Normalization::QuarterHalfDim).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_batch(&spec, &f, 32, Normalization::QuarterHalfDim).unwrap());
    assert_eq!(a, b);
    let lone = linear_statistic(&f, &sample_spectrum(&spec, 17).unwrap(), Normalization::QuarterHalfDim);
    assert_eq!(a[17], lone);
    let csv = statistics_csv(&a);
    assert!(csv.starts_with("sample_index,value\n0,"));
    assert_eq!(csv.lines().count(), 33);
}

#[test]
fn ks_statistic_values() {
    assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
    assert_eq!(ks_statistic(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
    assert!((ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[2.5, 10.0]) - 0.5).abs() < 1e-15);
}

#[test]
fn predictors() {
    let f = bulk();
    // The bump's Dirichlet energy is radius independent: (1/4π)∫|∇f|² = 1/2.
    let reference = TestFunction::upper_half_bump(c(0.0, 0.5), 0.25).unwrap();
    assert_close(predict_bulk_variance(&reference).unwrap(), 0.5, 1e-6, "bulk oracle");
    assert_close(
        predict_bulk_variance(&f.scaled(2.0)).unwrap(),
        4.0 * predict_bulk_variance(&f).unwrap(),
        1e-12,
        "scaling",
    );
    assert_eq!(predict_bulk_variance(&f.scaled(0.0)).unwrap(), 0.0);
    assert!(predict_bulk_variance(&TestFunction::harmonic(1).unwrap()).is_err());

    assert_close(line_variance_constant(), 0.330_494_606_292_647_2, 1e-14, "line constant");
    let g = TestFunction::interval_bump(-0.5, 0.5).unwrap();
    assert_close(
        predict_line_variance(&g).unwrap(),
        line_variance_constant() * 0.49169040645636323,
        1e-10,
        "line oracle",
    );
    assert_close(
        predict_line_variance(&g.scaled(2.0)).unwrap(),
        4.0 * predict_line_variance(&g).unwrap(),
        1e-12,
        "scaling",
    );
    assert_eq!(predict_line_variance(&g.scaled(0.0)).unwrap(), 0.0);
    assert!(predict_line_variance(&f).is_err());

    let v = predict_ginue_variance(&TestFunction::harmonic(1).unwrap()).unwrap();
    assert!((v.sigma_a2 - 0.25).abs() < 1e-12 && (v.sigma_b2 - 0.25).abs() < 1e-12, "{v:?}");
    let v = predict_ginue_variance(&TestFunction::harmonic(2).unwrap()).unwrap();
    assert!((v.sigma_a2 - 0.5).abs() < 1e-12 && (v.sigma_b2 - 0.5).abs() < 1e-12, "{v:?}");
    let v = predict_ginue_variance(&TestFunction::disc_bump(c(0.1, 0.0), 0.6).unwrap()).unwrap();
    assert_eq!(v.sigma_b2, 0.0);
    assert_close(v.sigma_a2, 0.5, 1e-6, "disc bump");
    assert!(predict_ginue_variance(&g).is_err());
}

#[test]
fn fourier_coefficients_of_re_z() {
    let k = fourier_coefficients(&TestFunction::harmonic(3).unwrap(), 512, 4);
    for (i, v) in k.iter().enumerate() {
        let expect = if i == 1 || i == 7 { 0.5 } else { 0.0 };
        assert!((v - c(expect, 0.0)).norm() < 1e-14, "mode {}: {v}", i as i64 - 4);
    }
}

#[test]
fn ginue_trace_variance_small_dim() {
    let spec = EnsembleSpec::new(AtomDistribution::ComplexGaussian, 16, 21).unwrap();
    let x = run_batch(&spec, &TestFunction::harmonic(1).unwrap(), 4000, Normalization::None).unwrap();
    let r = k_statistics(&x, 4).unwrap();
    assert!((r.kappa[1] - 0.5).abs() <= 3.0 * r.se_k2.unwrap(), "{r:?}");
}

#[test]
fn universality_same_spec_is_exact() {
    let spec = EnsembleSpec::new(AtomDistribution::ComplexGaussian, 16, 0).unwrap();
    let rep = universality_compare(&spec, &spec, &bulk(), 200, 77).unwrap();
    let d = rep.comparison;
    assert_eq!((d.delta_k2, d.delta_k3, d.delta_k4, d.ks), (0.0, 0.0, 0.0, 0.0));
    let other = EnsembleSpec::new(AtomDistribution::ComplexGaussian, 18, 0).unwrap();
    assert!(universality_compare(&spec, &other, &bulk(), 10, 1).is_err());
}

#[test]
fn universality_detects_variance_mismatch() {
    // Entries of variance 2 double Var(Re tr M).
    let spec = EnsembleSpec::new(AtomDistribution::ComplexGaussian, 16, 3).unwrap();
    let f = TestFunction::harmonic(1).unwrap();
    let a = run_batch(&spec, &f, 2000, Normalization::None).unwrap();
    let b: Vec<f64> = (0..2000u64)
        .map(|i| {
            let m = sample_matrix(&spec.with_derived_seed(1), i).scale(c(2f64.sqrt(), 0.0));
            linear_statistic(&f, &eigenvalues_complex(&m).unwrap(), Normalization::None)
        })
        .collect();
    let (_, _, d) = compare_batches(&a, &b).unwrap();
    assert!(d.delta_k2.abs() > 5.0 * d.se_k2, "{d:?}");
}

#[test]
fn costin_lebowitz_low_orders() {
    let n = 6;
    let q = QuadratureOptions { panels: 6, order: 8 };
    let ctx = KernelContext::new(n, Regime::ComplexComplex).unwrap().with_quadrature(q);
    let f = bulk();
    let (bx, by) = f.bounding_box();
    let mean: f64 =
        tensor_rule(bx, by, q).iter().map(|&(x, y, w)| w * f.eval(x, y) * complex_density_scaled(&ctx, c(x, y))).sum();
    assert_close(costin_lebowitz_cumulant(&ctx, &f, 1).unwrap(), mean, 1e-12, "C1");
    let c2 = costin_lebowitz_cumulant(&ctx, &f, 2).unwrap();
    let s_part = finite_n_variance_terms(&ctx, &f).unwrap().s_part();
    assert_close(c2, s_part, 1e-9, "C2");
    assert!(costin_lebowitz_cumulant(&ctx, &f, 4).is_err());
    let rr = KernelContext::new(n, Regime::RealReal).unwrap();
    assert!(costin_lebowitz_cumulant(&rr, &f, 2).is_err());
    assert!(costin_lebowitz_cumulant(&KernelContext::new(40, Regime::ComplexComplex).unwrap(), &f, 1).is_err());
}

#[test]
fn costin_lebowitz_third_cumulant_is_suppressed() {
    let q = QuadratureOptions { panels: 4, order: 8 };
    let f = TestFunction::upper_half_bump(c(0.0, 0.5), 0.25).unwrap();
    let ratio = |n: usize| {
        let ctx = KernelContext::new(n, Regime::ComplexComplex).unwrap().with_quadrature(q);
        let c2 = costin_lebowitz_cumulant(&ctx, &f, 2).unwrap();
        let c3 = costin_lebowitz_cumulant(&ctx, &f, 3).unwrap();
        assert!(c2 > 0.0);
        c3.abs() / c2.powf(1.5)
    };
    let r: Vec<f64> = [8, 16, 32].map(ratio).to_vec();
    assert!(r[1] < r[0] && r[2] < r[1], "{r:?}");
    assert!(r[2] <= 0.2, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_statistics_shift_and_scale(seed in any::<u64>(), shift in -50.0f64..50.0, scale in 0.1f64..10.0) {
        let x = normals(64, seed);
        let y: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
        let a = k_statistics(&x, 4).unwrap();
        let b = k_statistics(&y, 4).unwrap();
        prop_assert!((b.kappa[0] - (scale * a.kappa[0] + shift)).abs() <= 1e-9 * (1.0 + shift.abs() + scale));
        for r in 2..=4 {
            let expect = scale.powi(r as i32) * a.kappa[r - 1];
            prop_assert!((b.kappa[r - 1] - expect).abs() <= 1e-8 * scale.powi(r as i32).max(1.0));
        }
        prop_assert!(b.kappa[1] >= 0.0);
        prop_assert!(b.se_k2.unwrap() >= 0.0 && b.se_k3.unwrap() >= 0.0 && b.se_k4.unwrap() >= 0.0);
    }

    #[test]
    fn multinomial_is_order_invariant(parts in proptest::collection::vec(1u32..6, 1..6), rot in 0usize..6) {
        let n: u32 = parts.iter().sum();
        let mut p2 = parts.clone();
        let len = p2.len();
        p2.rotate_left(rot % len);
        prop_assert_eq!(multinomial(n, &parts).unwrap(), multinomial(n, &p2).unwrap());
    }
}
