#![allow(dead_code)]

use ginibre_core::linalg::ComplexMatrix;
use ginibre_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cgauss(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5) * 2.0
}

pub fn random_complex(n: usize, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed);
    ComplexMatrix::from_fn(n, n, |_, _| cgauss(&mut r))
}

pub fn random_real(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n * n).map(|_| r.gen::<f64>() * 2.0 - 1.0).collect()
}

pub fn random_skew(n: usize, seed: u64) -> ComplexMatrix {
    let mut r = rng(seed);
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = cgauss(&mut r);
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
    m
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn assert_close(a: f64, b: f64, rel: f64, what: &str) {
    let e = (a - b).abs() / b.abs().max(1e-300);
    assert!(e <= rel, "{what}: got {a:e}, expected {b:e}, relative error {e:e} > {rel:e}");
}

/// Sorts complex values lexicographically by (re, im) for multiset comparison.
pub fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

/// Max distance under a greedy nearest matching of two multisets.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}
