//! Independent-entry random matrices with deterministic per-sample seeding.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

const SQRT3: f64 = 1.732_050_807_568_877_2;
/// 32-bit words consumed per matrix entry.
const WORDS_PER_ENTRY: u128 = 4;

/// Entry law, standardized to mean 0 and E|ξ|² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum AtomDistribution {
    ComplexGaussian,
    RealGaussian,
    /// ±√3 with probability 1/6 each, 0 with probability 2/3.
    MatchedDiscreteReal,
    /// (A + iB)/√2 with A, B independent [`AtomDistribution::MatchedDiscreteReal`].
    MatchedDiscreteComplex,
}

impl AtomDistribution {
    pub const ALL: [AtomDistribution; 4] =
        [Self::ComplexGaussian, Self::RealGaussian, Self::MatchedDiscreteReal, Self::MatchedDiscreteComplex];

    pub fn is_real(self) -> bool {
        matches!(self, Self::RealGaussian | Self::MatchedDiscreteReal)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ComplexGaussian => "complex-gaussian",
            Self::RealGaussian => "real-gaussian",
            Self::MatchedDiscreteReal => "matched-discrete-real",
            Self::MatchedDiscreteComplex => "matched-discrete-complex",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Self::ComplexGaussian => 1,
            Self::RealGaussian => 2,
            Self::MatchedDiscreteReal => 3,
            Self::MatchedDiscreteComplex => 4,
        }
    }

    /// Draws one standardized value from four 32-bit words.
    #[inline]
    fn draw(self, w: [u64; 2]) -> Complex64 {
        let u1 = unit_open(w[0]);
        let u2 = unit_open(w[1]);
        match self {
            Self::RealGaussian => {
                let r = (-2.0 * u1.ln()).sqrt();
                Complex64::new(r * (std::f64::consts::TAU * u2).cos(), 0.0)
            }
            Self::ComplexGaussian => {
                // Real and imaginary parts N(0, 1/2).
                let r = (-u1.ln()).sqrt();
                let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
                Complex64::new(r * c, r * s)
            }
            Self::MatchedDiscreteReal => Complex64::new(three_point(u1), 0.0),
            Self::MatchedDiscreteComplex => {
                Complex64::new(three_point(u1), three_point(u2)) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }
}

impl fmt::Display for AtomDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AtomDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown atom distribution '{s}'")))
    }
}

/// Uniform on (0, 1].
#[inline]
fn unit_open(x: u64) -> f64 {
    ((x >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn three_point(u: f64) -> f64 {
    if u <= 1.0 / 6.0 {
        -SQRT3
    } else if u <= 1.0 / 3.0 {
        SQRT3
    } else {
        0.0
    }
}

/// Ensemble description: atom law, dimension and master seed. Entries are
/// scaled by `1/√dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub atom: AtomDistribution,
    pub dim: usize,
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn new(atom: AtomDistribution, dim: usize, master_seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {dim}")));
        }
        Ok(Self { atom, dim, master_seed })
    }

    /// Variant with its master seed re-derived from `(seed, atom, dim)`.
    pub fn with_derived_seed(self, seed: u64) -> Self {
        let s = mix64(seed ^ mix64(self.atom.tag().wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        Self { master_seed: mix64(s ^ mix64(self.dim as u64)), ..self }
    }
}

/// SplitMix64 finalizer; a bijection on u64.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample seed. For fixed `master` the map `index -> seed` is injective,
/// and likewise for fixed `index`.
pub fn derive_sample_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// Generates entry values row by row; entry (i, j) reads a fixed window of
/// the ChaCha stream, so any row can be produced independently.
fn fill_entries(spec: &EnsembleSpec, index: u64, mut put: impl FnMut(usize, Complex64)) {
    let n = spec.dim;
    let scale = 1.0 / (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_sample_seed(spec.master_seed, index));
    for i in 0..n {
        rng.set_word_pos((i * n) as u128 * WORDS_PER_ENTRY);
        for j in 0..n {
            let w = [rng.next_u64(), rng.next_u64()];
            put(i * n + j, spec.atom.draw(w) * scale);
        }
    }
}

/// One matrix of the ensemble, fully determined by `(spec, sample_index)`.
pub fn sample_matrix(spec: &EnsembleSpec, sample_index: u64) -> ComplexMatrix {
    let n = spec.dim;
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    fill_entries(spec, sample_index, |k, z| data[k] = z);
    ComplexMatrix::new(n, n, data).expect("finite entries")
}

/// Real row-major sample for real atom kinds; identical values to
/// [`sample_matrix`].
pub fn sample_real_matrix(spec: &EnsembleSpec, sample_index: u64) -> Result<Vec<f64>> {
    if !spec.atom.is_real() {
        return Err(Error::NotReal);
    }
    let n = spec.dim;
    let mut data = vec![0.0; n * n];
    fill_entries(spec, sample_index, |k, z| data[k] = z.re);
    Ok(data)
}

/// Analytic moments of an atom distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentTable {
    /// E[ξ^k] for k = 1..=order.
    Real(Vec<f64>),
    /// E[ξ^a ξ̄^b] keyed by (a, b), 1 ≤ a + b ≤ order.
    Complex(BTreeMap<(u32, u32), Complex64>),
}

fn real_moment(atom: AtomDistribution, k: u32) -> f64 {
    match (atom, k) {
        (_, 0) => 1.0,
        (_, k) if k % 2 == 1 => 0.0,
        (AtomDistribution::RealGaussian, k) => (1..k).step_by(2).map(f64::from).product(),
        // E ξ^k = (1/3)·3^{k/2} for even k ≥ 2.
        (AtomDistribution::MatchedDiscreteReal, k) => 3f64.powi(k as i32 / 2) / 3.0,
        _ => unreachable!("real_moment on a complex kind"),
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Moments of order ≤ `order` (1 to 4).
pub fn atom_moments(dist: AtomDistribution, order: u32) -> Result<MomentTable> {
    if !(1..=4).contains(&order) {
        return Err(Error::Unsupported(format!("moment order {order}")));
    }
    match dist {
        AtomDistribution::RealGaussian | AtomDistribution::MatchedDiscreteReal => {
            Ok(MomentTable::Real((1..=order).map(|k| real_moment(dist, k)).collect()))
        }
        AtomDistribution::ComplexGaussian => {
            let mut t = BTreeMap::new();
            for a in 0..=order {
                for b in 0..=order - a {
                    if a + b == 0 {
                        continue;
                    }
                    let v = if a == b { (1..=a).map(f64::from).product() } else { 0.0 };
                    t.insert((a, b), Complex64::new(v, 0.0));
                }
            }
            Ok(MomentTable::Complex(t))
        }
        AtomDistribution::MatchedDiscreteComplex => {
            // ξ^a ξ̄^b = 2^{-(a+b)/2} (A + iB)^a (A − iB)^b, expanded binomially.
            let re = AtomDistribution::MatchedDiscreteReal;
            let i = Complex64::new(0.0, 1.0);
            let mut t = BTreeMap::new();
            for a in 0..=order {
                for b in 0..=order - a {
                    if a + b == 0 {
                        continue;
                    }
                    let mut acc = Complex64::new(0.0, 0.0);
                    for p in 0..=a {
                        for q in 0..=b {
                            // A^{(a-p)+(b-q)} B^{p+q} i^p (−i)^q
                            let coef = binomial(a, p) * binomial(b, q);
                            let phase = i.powu(p) * (-i).powu(q);
                            let m = real_moment(re, a - p + b - q) * real_moment(re, p + q);
                            acc += phase * coef * m;
                        }
                    }
                    t.insert((a, b), acc * 2f64.powf(-f64::from(a + b) / 2.0));
                }
            }
            Ok(MomentTable::Complex(t))
        }
    }
}

/// Matrix dump rows "i,j,re,im".
pub fn matrix_csv(m: &ComplexMatrix) -> String {
    let mut s = String::from("i,j,re,im\n");
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            s.push_str(&format!("{i},{j},{:e},{:e}\n", z.re, z.im));
        }
    }
    s
}
