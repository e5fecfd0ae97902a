//! Run configuration: defaults, then a `key = value` file, then flags.

use ginibre_core::clt::Normalization;
use ginibre_core::ensembles::AtomDistribution;
use ginibre_core::kernels::Regime;
use ginibre_core::testfn::TestFunction;
use ginibre_core::Complex64;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Experiment presets for `clt` and `variance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    /// Real Ginibre, bump in the upper half of the disc.
    Bulk,
    /// Real Ginibre, interval bump on the real line.
    Line,
    /// Complex Ginibre, planar test function.
    Ginue,
}

impl FromStr for Case {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bulk" => Ok(Self::Bulk),
            "line" => Ok(Self::Line),
            "ginue" => Ok(Self::Ginue),
            _ => Err(format!("unknown case '{s}' (expected bulk, line or ginue)")),
        }
    }
}

/// Exact-identity suites of `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Pfaffian,
    Quaternion,
    Combinatorics,
    Specialfn,
    Eigensolver,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pfaffian" => Ok(Self::Pfaffian),
            "quaternion" => Ok(Self::Quaternion),
            "combinatorics" => Ok(Self::Combinatorics),
            "specialfn" => Ok(Self::Specialfn),
            "eigensolver" => Ok(Self::Eigensolver),
            _ => Err(format!(
                "unknown suite '{s}' (expected pfaffian, quaternion, combinatorics, specialfn or eigensolver)"
            )),
        }
    }
}

/// Test-function family named in the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    DiscBump,
    UpperHalfBump,
    IntervalBump,
    Harmonic,
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "disc-bump" => Ok(Self::DiscBump),
            "upper-half-bump" => Ok(Self::UpperHalfBump),
            "interval-bump" => Ok(Self::IntervalBump),
            "harmonic" => Ok(Self::Harmonic),
            _ => {
                Err(format!("unknown function '{s}' (expected disc-bump, upper-half-bump, interval-bump or harmonic)"))
            }
        }
    }
}

/// Fully resolved settings; serialized into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub seed: u64,
    pub dim: usize,
    pub count: usize,
    pub atom: Option<AtomDistribution>,
    pub atom_b: AtomDistribution,
    pub case: Case,
    pub function: Option<Family>,
    pub center_re: Option<f64>,
    pub center_im: Option<f64>,
    pub radius: Option<f64>,
    pub a: f64,
    pub b: f64,
    pub degree: u32,
    pub amplitude: f64,
    pub normalization: Option<Normalization>,
    pub tolerance: Option<f64>,
    pub ks_max: f64,
    pub suite: Option<Suite>,
    pub regime: Regime,
    pub grid: usize,
    pub extent: f64,
    pub ref_re: f64,
    pub ref_im: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub positions: usize,
    pub panels: usize,
    pub order: usize,
    /// Worker count (0 = all cores). Not echoed: results do not depend on it.
    #[serde(skip)]
    pub threads: usize,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub no_timestamp: bool,
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            subcommand: String::new(),
            seed: 0,
            dim: 64,
            count: 1000,
            atom: None,
            atom_b: AtomDistribution::MatchedDiscreteComplex,
            case: Case::Bulk,
            function: None,
            center_re: None,
            center_im: None,
            radius: None,
            a: -0.5,
            b: 0.5,
            degree: 1,
            amplitude: 1.0,
            normalization: None,
            tolerance: None,
            ks_max: 0.035,
            suite: None,
            regime: Regime::RealReal,
            grid: 21,
            extent: 1.0,
            ref_re: 0.0,
            ref_im: 0.5,
            z_re: 0.3,
            z_im: 0.0,
            positions: 64,
            panels: 12,
            order: 8,
            threads: 0,
            output: None,
            csv: None,
            no_timestamp: false,
            timing: false,
        }
    }
}

/// Names accepted by [`RunConfig::set`].
pub const KEYS: &[&str] = &[
    "seed",
    "dim",
    "count",
    "atom",
    "atom_b",
    "case",
    "function",
    "center_re",
    "center_im",
    "radius",
    "a",
    "b",
    "degree",
    "amplitude",
    "normalization",
    "tolerance",
    "ks_max",
    "suite",
    "regime",
    "grid",
    "extent",
    "ref_re",
    "ref_im",
    "z_re",
    "z_im",
    "positions",
    "panels",
    "order",
    "threads",
    "output",
    "csv",
    "no_timestamp",
    "timing",
];

fn parse<T: FromStr>(key: &str, value: &str, kind: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("key '{key}' expects {kind}, got '{value}'"))
}

fn parse_named<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("key '{key}': {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("key '{key}' expects a boolean, got '{value}'")),
    }
}

fn parse_normalization(value: &str) -> Result<Normalization, String> {
    match value {
        "none" => Ok(Normalization::None),
        "quarter-half-dim" => Ok(Normalization::QuarterHalfDim),
        "quarter-full-dim" => Ok(Normalization::QuarterFullDim),
        _ => Err(format!(
            "key 'normalization': unknown value '{value}' (expected none, quarter-half-dim or quarter-full-dim)"
        )),
    }
}

fn parse_regime(value: &str) -> Result<Regime, String> {
    match value {
        "complex-complex" => Ok(Regime::ComplexComplex),
        "real-real" => Ok(Regime::RealReal),
        _ => Err(format!("key 'regime': unknown value '{value}' (expected complex-complex or real-real)")),
    }
}

impl RunConfig {
    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value;
        match key {
            "seed" => self.seed = parse(key, v, "an unsigned integer")?,
            "dim" => self.dim = parse(key, v, "an unsigned integer")?,
            "count" => self.count = parse(key, v, "an unsigned integer")?,
            "atom" => self.atom = Some(parse_named(key, v)?),
            "atom_b" => self.atom_b = parse_named(key, v)?,
            "case" => self.case = parse_named(key, v)?,
            "function" => self.function = Some(parse_named(key, v)?),
            "center_re" => self.center_re = Some(parse(key, v, "a number")?),
            "center_im" => self.center_im = Some(parse(key, v, "a number")?),
            "radius" => self.radius = Some(parse(key, v, "a number")?),
            "a" => self.a = parse(key, v, "a number")?,
            "b" => self.b = parse(key, v, "a number")?,
            "degree" => self.degree = parse(key, v, "an unsigned integer")?,
            "amplitude" => self.amplitude = parse(key, v, "a number")?,
            "normalization" => self.normalization = Some(parse_normalization(v)?),
            "tolerance" => self.tolerance = Some(parse(key, v, "a number")?),
            "ks_max" => self.ks_max = parse(key, v, "a number")?,
            "suite" => self.suite = Some(parse_named(key, v)?),
            "regime" => self.regime = parse_regime(v)?,
            "grid" => self.grid = parse(key, v, "an unsigned integer")?,
            "extent" => self.extent = parse(key, v, "a number")?,
            "ref_re" => self.ref_re = parse(key, v, "a number")?,
            "ref_im" => self.ref_im = parse(key, v, "a number")?,
            "z_re" => self.z_re = parse(key, v, "a number")?,
            "z_im" => self.z_im = parse(key, v, "a number")?,
            "positions" => self.positions = parse(key, v, "an unsigned integer")?,
            "panels" => self.panels = parse(key, v, "an unsigned integer")?,
            "order" => self.order = parse(key, v, "an unsigned integer")?,
            "threads" => self.threads = parse(key, v, "an unsigned integer")?,
            "output" => self.output = Some(PathBuf::from(v)),
            "csv" => self.csv = Some(PathBuf::from(v)),
            "no_timestamp" => self.no_timestamp = parse_bool(key, v)?,
            "timing" => self.timing = parse_bool(key, v)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), String> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("{origin}:{line_no}: malformed line '{}' (expected key = value)", raw.trim()));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(format!("{origin}:{line_no}: missing key"));
            }
            self.set(key, value).map_err(|e| format!("{origin}:{line_no}: {e}"))?;
        }
        Ok(())
    }

    /// Atom law for the primary ensemble: explicit, or implied by the
    /// subcommand and case. `universality` compares against complex
    /// Gaussian entries by default.
    pub fn atom_or_default(&self) -> AtomDistribution {
        self.atom.unwrap_or(match self.case {
            _ if self.subcommand == "universality" => AtomDistribution::ComplexGaussian,
            Case::Bulk | Case::Line => AtomDistribution::RealGaussian,
            Case::Ginue => AtomDistribution::ComplexGaussian,
        })
    }

    /// Test function from the explicit family, or the case preset.
    pub fn test_function(&self) -> ginibre_core::Result<TestFunction> {
        let family = self.function.unwrap_or(match self.case {
            Case::Bulk => Family::UpperHalfBump,
            Case::Line => Family::IntervalBump,
            Case::Ginue => Family::Harmonic,
        });
        let (cre, cim, r) = match family {
            Family::UpperHalfBump => {
                (self.center_re.unwrap_or(0.0), self.center_im.unwrap_or(0.5), self.radius.unwrap_or(0.2))
            }
            _ => (self.center_re.unwrap_or(0.0), self.center_im.unwrap_or(0.0), self.radius.unwrap_or(0.5)),
        };
        let center = Complex64::new(cre, cim);
        let f = match family {
            Family::DiscBump => TestFunction::disc_bump(center, r)?,
            Family::UpperHalfBump => TestFunction::upper_half_bump(center, r)?,
            Family::IntervalBump => TestFunction::interval_bump(self.a, self.b)?,
            Family::Harmonic => TestFunction::harmonic(self.degree)?,
        };
        if self.amplitude == 1.0 {
            Ok(f)
        } else {
            f.scaled(self.amplitude).validated()
        }
    }

    /// Normalization of the statistic: explicit, or implied by the case.
    pub fn normalization_or_default(&self) -> Normalization {
        self.normalization.unwrap_or(match self.case {
            Case::Line => Normalization::QuarterHalfDim,
            Case::Bulk | Case::Ginue => Normalization::None,
        })
    }

    /// Resolved copy with every case-implied default made explicit.
    pub fn resolved(mut self) -> Self {
        self.atom = Some(self.atom_or_default());
        self.normalization = Some(self.normalization_or_default());
        self
    }
}

/// Reads a configuration file into a fresh default configuration.
pub fn parse_config(path: &Path) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cfg = RunConfig::default();
    cfg.apply_text(&text, &path.display().to_string())?;
    Ok(cfg)
}
