//! Linear statistics over sampled spectra and batch comparisons.

use super::cumulants::{k_statistics, CumulantReport};
use crate::ensembles::{sample_matrix, sample_real_matrix, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues_complex, eigenvalues_real, Spectrum};
use crate::testfn::TestFunction;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Optional `dim`-dependent rescaling of a linear statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    None,
    /// Divide by `(dim/2)^{1/4}`: the half dimension of a 2n-dimensional matrix.
    QuarterHalfDim,
    /// Divide by `dim^{1/4}`.
    QuarterFullDim,
}

impl Normalization {
    pub fn factor(self, dim: usize) -> f64 {
        match self {
            Self::None => 1.0,
            Self::QuarterHalfDim => (dim as f64 / 2.0).powf(-0.25),
            Self::QuarterFullDim => (dim as f64).powf(-0.25),
        }
    }
}

/// `Σ_j f(Re λ_j, Im λ_j)`, optionally rescaled. Interval bumps only see
/// eigenvalues flagged real (or with exactly zero imaginary part).
pub fn linear_statistic(f: &TestFunction, spectrum: &Spectrum, normalization: Normalization) -> f64 {
    let sum: f64 = spectrum.eigenvalues.iter().map(|z| f.eval(z.re, z.im)).sum();
    sum * normalization.factor(spectrum.source_dim)
}

/// Spectrum of sample `index`: real Schur path for real atoms.
pub fn sample_spectrum(spec: &EnsembleSpec, index: u64) -> Result<Spectrum> {
    if spec.atom.is_real() {
        eigenvalues_real(sample_real_matrix(spec, index)?, spec.dim)
    } else {
        eigenvalues_complex(&sample_matrix(spec, index))
    }
}

/// Applies `g` to the spectra of samples `0..count` in parallel; output is
/// in index order regardless of the worker count.
pub fn map_samples<T, G>(spec: &EnsembleSpec, count: usize, g: G) -> Result<Vec<T>>
where
    T: Send,
    G: Fn(u64, &Spectrum) -> T + Sync,
{
    (0..count as u64).into_par_iter().map(|i| sample_spectrum(spec, i).map(|s| g(i, &s))).collect()
}

/// Linear statistics of samples `0..count`.
pub fn run_batch(
    spec: &EnsembleSpec,
    f: &TestFunction,
    count: usize,
    normalization: Normalization,
) -> Result<Vec<f64>> {
    map_samples(spec, count, |_, s| linear_statistic(f, s, normalization))
}

/// "sample_index,value" rows.
pub fn statistics_csv(values: &[f64]) -> String {
    let mut s = String::from("sample_index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{i},{v:.17e}");
    }
    s
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Cumulant differences `a − b` with combined standard errors, and the KS
/// statistic of the mean-centered batches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchComparison {
    pub delta_k2: f64,
    pub se_k2: f64,
    pub delta_k3: f64,
    pub se_k3: f64,
    pub delta_k4: f64,
    pub se_k4: f64,
    pub ks: f64,
}

pub fn compare_batches(a: &[f64], b: &[f64]) -> Result<(CumulantReport, CumulantReport, BatchComparison)> {
    let ra = k_statistics(a, 4)?;
    let rb = k_statistics(b, 4)?;
    let missing = || Error::InsufficientSamples { have: a.len().min(b.len()), need: 6 };
    let comb =
        |x: Option<f64>, y: Option<f64>| -> Result<f64> { Ok(x.ok_or_else(missing)?.hypot(y.ok_or_else(missing)?)) };
    let center = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| x - m).collect::<Vec<_>>()
    };
    let cmp = BatchComparison {
        delta_k2: ra.kappa[1] - rb.kappa[1],
        se_k2: comb(ra.se_k2, rb.se_k2)?,
        delta_k3: ra.kappa[2] - rb.kappa[2],
        se_k3: comb(ra.se_k3, rb.se_k3)?,
        delta_k4: ra.kappa[3] - rb.kappa[3],
        se_k4: comb(ra.se_k4, rb.se_k4)?,
        ks: ks_statistic(&center(a), &center(b)),
    };
    Ok((ra, rb, cmp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniversalityReport {
    pub spec_a: EnsembleSpec,
    pub spec_b: EnsembleSpec,
    pub test_function: TestFunction,
    pub sample_count: usize,
    pub report_a: CumulantReport,
    pub report_b: CumulantReport,
    pub comparison: BatchComparison,
}

/// Runs both ensembles on seeds derived from `master_seed` and compares
/// the cumulants of `Σ f(λ_j)`.
pub fn universality_compare(
    spec_a: &EnsembleSpec,
    spec_b: &EnsembleSpec,
    f: &TestFunction,
    count: usize,
    master_seed: u64,
) -> Result<UniversalityReport> {
    if spec_a.dim != spec_b.dim {
        return Err(Error::DimensionMismatch(format!("dims {} and {}", spec_a.dim, spec_b.dim)));
    }
    let a = spec_a.with_derived_seed(master_seed);
    let b = spec_b.with_derived_seed(master_seed);
    let xa = run_batch(&a, f, count, Normalization::None)?;
    let xb = run_batch(&b, f, count, Normalization::None)?;
    let (report_a, report_b, comparison) = compare_batches(&xa, &xb)?;
    Ok(UniversalityReport {
        spec_a: a,
        spec_b: b,
        test_function: *f,
        sample_count: count,
        report_a,
        report_b,
        comparison,
    })
}
