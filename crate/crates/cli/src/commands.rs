//! Subcommand bodies. Each returns whether its checks passed.

use crate::config::{Case, RunConfig};
use crate::verify::{run_suite, Check};
use ginibre_core::clt::*;
use ginibre_core::ensembles::{AtomDistribution, EnsembleSpec};
use ginibre_core::hermitization::ClassicalProfile;
use ginibre_core::kernels::{d_cc, d_rr, finite_n_variance, i_cc, i_rr, s_cc, s_rr, KernelContext, Regime};
use ginibre_core::quadrature::QuadratureOptions;
use ginibre_core::testfn::TestFunction;
use ginibre_core::{Complex64, Error};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration or input; exit code 2.
    Usage(String),
    /// Numerical or output failure; exit code 1.
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_)
            | Error::Support(_)
            | Error::Unsupported(_)
            | Error::InsufficientSamples { .. }
            | Error::DimensionMismatch(_)
            | Error::OddDimension(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

/// JSON report envelope shared by every reporting subcommand.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    subcommand: &'a str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp_unix: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_seconds: Option<f64>,
    pass: bool,
    result: T,
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Runtime(format!("cannot write to stdout: {e}")))
        }
    }
}

fn emit<T: Serialize>(cfg: &RunConfig, start: Instant, pass: bool, result: T) -> Outcome {
    let report = Report {
        subcommand: &cfg.subcommand,
        config: cfg,
        timestamp_unix: (!cfg.no_timestamp)
            .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)),
        elapsed_seconds: cfg.timing.then(|| start.elapsed().as_secs_f64()),
        pass,
        result,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    write_output(cfg.output.as_deref(), &text)?;
    Ok(pass)
}

fn spec(cfg: &RunConfig, atom: AtomDistribution) -> Result<EnsembleSpec, Failure> {
    Ok(EnsembleSpec::new(atom, cfg.dim, cfg.seed)?)
}

fn quadrature(cfg: &RunConfig) -> Result<QuadratureOptions, Failure> {
    if cfg.panels == 0 || cfg.order == 0 {
        return Err(Failure::Usage("panels and order must be positive".into()));
    }
    Ok(QuadratureOptions { panels: cfg.panels, order: cfg.order })
}

fn half_dim(cfg: &RunConfig) -> Result<usize, Failure> {
    if cfg.dim % 2 == 1 || cfg.dim < 4 {
        return Err(Failure::Usage(format!("dim must be even and at least 4, got {}", cfg.dim)));
    }
    Ok(cfg.dim / 2)
}

pub fn dispatch(cfg: &RunConfig) -> Outcome {
    let body = || match cfg.subcommand.as_str() {
        "sample" => sample(cfg),
        "clt" => clt(cfg),
        "universality" => universality(cfg),
        "kernel-table" => kernel_table(cfg),
        "variance" => variance(cfg),
        "verify" => verify(cfg),
        "classical" => classical(cfg),
        other => Err(Failure::Usage(format!("unknown subcommand '{other}'"))),
    };
    if cfg.threads == 0 {
        body()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        pool.install(body)
    }
}

fn sample(cfg: &RunConfig) -> Outcome {
    let s = spec(cfg, cfg.atom_or_default())?;
    let rows = map_samples(&s, cfg.count, |i, sp| {
        let mut block = String::new();
        for (z, is_real) in sp.iter() {
            let _ = writeln!(block, "{i},{:.17e},{:.17e},{}", z.re, z.im, u8::from(is_real));
        }
        block
    })?;
    let mut text = String::from("sample_index,re,im,is_real\n");
    rows.iter().for_each(|b| text.push_str(b));
    write_output(cfg.output.as_deref(), &text)?;
    Ok(true)
}

/// Limiting variance of the raw statistic `Σ f(λ_j)` for the case.
fn raw_prediction(cfg: &RunConfig, f: &TestFunction) -> Result<f64, Failure> {
    Ok(match cfg.case {
        Case::Bulk => predict_bulk_variance(f)?,
        Case::Line => predict_line_variance(f)? * (cfg.dim as f64 / 2.0).sqrt(),
        Case::Ginue => {
            if cfg.atom_or_default().is_real() {
                return Err(Failure::Usage("case ginue needs a complex atom distribution".into()));
            }
            predict_ginue_variance(f)?.total()
        }
    })
}

#[derive(Serialize)]
struct CltResult {
    test_function: TestFunction,
    sample_count: usize,
    cumulants: CumulantReport,
    predicted_variance: f64,
    normality: NormalityReport,
}

fn clt(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let f = cfg.test_function()?;
    let norm = cfg.normalization_or_default();
    let factor = norm.factor(cfg.dim);
    let predicted = raw_prediction(cfg, &f)? * factor * factor;
    let values = run_batch(&spec(cfg, cfg.atom_or_default())?, &f, cfg.count, norm)?;
    if let Some(p) = &cfg.csv {
        write_output(Some(p), &statistics_csv(&values))?;
    }
    let cumulants = k_statistics(&values, 6.min(cfg.count))?;
    let tol = cfg.tolerance.unwrap_or(match cfg.case {
        Case::Bulk => 0.12,
        Case::Line => 0.15,
        Case::Ginue => 0.10,
    });
    let normality = normality_report(&cumulants, predicted, tol)?;
    let pass = normality.pass;
    emit(
        cfg,
        start,
        pass,
        CltResult { test_function: f, sample_count: cfg.count, cumulants, predicted_variance: predicted, normality },
    )
}

#[derive(Serialize)]
struct UniversalityResult {
    report: UniversalityReport,
    ks_max: f64,
    kappa2_ok: bool,
    kappa4_ok: bool,
    ks_ok: bool,
}

fn universality(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let f = cfg.test_function()?;
    let a = spec(cfg, cfg.atom_or_default())?;
    let b = spec(cfg, cfg.atom_b)?;
    let report = universality_compare(&a, &b, &f, cfg.count, cfg.seed)?;
    let c = report.comparison;
    let kappa2_ok = c.delta_k2.abs() <= 3.0 * c.se_k2;
    let kappa4_ok = c.delta_k4.abs() <= 4.0 * c.se_k4;
    let ks_ok = c.ks <= cfg.ks_max;
    let pass = kappa2_ok && kappa4_ok && ks_ok;
    emit(cfg, start, pass, UniversalityResult { report, ks_max: cfg.ks_max, kappa2_ok, kappa4_ok, ks_ok })
}

/// Grid `lo + (hi − lo)·k/(points − 1)`; a single point sits at `hi`.
fn axis(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect(),
    }
}

fn kernel_table(cfg: &RunConfig) -> Outcome {
    let n = half_dim(cfg)?;
    let ctx = KernelContext::new(n, cfg.regime)?.with_quadrature(quadrature(cfg)?);
    let r = (2.0 * n as f64).sqrt();
    let e = cfg.extent;
    let mut text = String::from("x,y,S,D,I\n");
    match cfg.regime {
        Regime::RealReal => {
            for &x in &axis(-e, e, cfg.grid) {
                for &y in &axis(-e, e, cfg.grid) {
                    let (s, d, i) = (s_rr(&ctx, r * x, r * y)?, d_rr(&ctx, r * x, r * y)?, i_rr(&ctx, r * x, r * y)?);
                    let _ = writeln!(text, "{x:.12e},{y:.12e},{s:.12e},{d:.12e},{i:.12e}");
                }
            }
        }
        Regime::ComplexComplex => {
            // Moduli of the entries at (x + iy, reference point).
            let w = Complex64::new(cfg.ref_re, cfg.ref_im) * r;
            let ys: Vec<f64> = (1..=cfg.grid).map(|k| e * k as f64 / cfg.grid as f64).collect();
            for &x in &axis(-e, e, cfg.grid) {
                for &y in &ys {
                    let z = Complex64::new(x, y) * r;
                    let (s, d, i) = (s_cc(&ctx, z, w)?.norm(), d_cc(&ctx, z, w)?.norm(), i_cc(&ctx, z, w)?.norm());
                    let _ = writeln!(text, "{x:.12e},{y:.12e},{s:.12e},{d:.12e},{i:.12e}");
                }
            }
        }
    }
    write_output(cfg.output.as_deref(), &text)?;
    Ok(true)
}

#[derive(Serialize)]
struct VarianceResult {
    test_function: TestFunction,
    finite_n: f64,
    limit: f64,
    monte_carlo: f64,
    monte_carlo_se: f64,
    sample_count: usize,
    /// `|MC − finite_n| / SE`; the check passes when it is at most 3.
    z_score: f64,
}

fn variance(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let f = cfg.test_function()?;
    let n = half_dim(cfg)?;
    let regime = match cfg.case {
        Case::Bulk => Regime::ComplexComplex,
        Case::Line => Regime::RealReal,
        Case::Ginue => return Err(Failure::Usage("variance supports the bulk and line cases".into())),
    };
    let ctx = KernelContext::new(n, regime)?.with_quadrature(quadrature(cfg)?);
    let finite_n = finite_n_variance(&ctx, &f)?;
    let limit = raw_prediction(cfg, &f)?;
    let values = run_batch(&spec(cfg, cfg.atom_or_default())?, &f, cfg.count, Normalization::None)?;
    let report = k_statistics(&values, 4)?;
    let se = report.se_k2.ok_or_else(|| Failure::Usage("count too small for a standard error".into()))?;
    let z_score = (report.kappa[1] - finite_n).abs() / se;
    let result = VarianceResult {
        test_function: f,
        finite_n,
        limit,
        monte_carlo: report.kappa[1],
        monte_carlo_se: se,
        sample_count: cfg.count,
        z_score,
    };
    emit(cfg, start, z_score <= 3.0, result)
}

#[derive(Serialize)]
struct VerifyResult {
    checks: Vec<Check>,
    failed: usize,
}

fn verify(cfg: &RunConfig) -> Outcome {
    let start = Instant::now();
    let suite = cfg.suite.ok_or_else(|| Failure::Usage("verify needs --suite".into()))?;
    let checks = run_suite(suite, cfg.seed)?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    emit(cfg, start, failed == 0, VerifyResult { checks, failed })
}

fn classical(cfg: &RunConfig) -> Outcome {
    let profile = ClassicalProfile::new(Complex64::new(cfg.z_re, cfg.z_im), cfg.grid, cfg.positions)?;
    write_output(cfg.output.as_deref(), &profile.to_csv())?;
    Ok(true)
}
