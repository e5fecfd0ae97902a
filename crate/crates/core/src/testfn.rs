//! Test functions with analytic gradients and Laplacians.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Family and parameters of a test function `f(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `A·exp(1 − 1/(1 − |z−c|²/R²))` inside the disc of radius R about c.
    DiscBump { center: Complex64, radius: f64, amplitude: f64 },
    /// A disc bump whose support lies in the upper half of the unit disc,
    /// away from the real line.
    UpperHalfBump { center: Complex64, radius: f64, amplitude: f64 },
    /// `A·exp(1 − 1/(1 − t²))`, `t = (2x − a − b)/(b − a)`, on real points only.
    IntervalBump { a: f64, b: f64, amplitude: f64 },
    /// `A·Re z^k`.
    HarmonicPolynomial { degree: u32, amplitude: f64 },
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::DiscBump { center, radius, amplitude } => {
                write!(f, "disc-bump(center={}{:+}i, radius={radius}, amplitude={amplitude})", center.re, center.im)
            }
            Self::UpperHalfBump { center, radius, amplitude } => write!(
                f,
                "upper-half-bump(center={}{:+}i, radius={radius}, amplitude={amplitude})",
                center.re, center.im
            ),
            Self::IntervalBump { a, b, amplitude } => {
                write!(f, "interval-bump(a={a}, b={b}, amplitude={amplitude})")
            }
            Self::HarmonicPolynomial { degree, amplitude } => {
                write!(f, "harmonic-polynomial(Re z^{degree}, amplitude={amplitude})")
            }
        }
    }
}

/// Profile `g(s) = exp(1 − 1/(1 − s))` on `0 ≤ s < 1` with its first two
/// derivatives in `s`.
#[inline]
fn radial_profile(s: f64) -> (f64, f64, f64) {
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s;
    let g = (1.0 - 1.0 / q).exp();
    let g1 = -g / (q * q);
    let g2 = g * (2.0 * s - 1.0) / q.powi(4);
    (g, g1, g2)
}

impl TestFunction {
    pub fn disc_bump(center: Complex64, radius: f64) -> Result<Self> {
        Self::DiscBump { center, radius, amplitude: 1.0 }.validated()
    }

    pub fn upper_half_bump(center: Complex64, radius: f64) -> Result<Self> {
        Self::UpperHalfBump { center, radius, amplitude: 1.0 }.validated()
    }

    pub fn interval_bump(a: f64, b: f64) -> Result<Self> {
        Self::IntervalBump { a, b, amplitude: 1.0 }.validated()
    }

    pub fn harmonic(degree: u32) -> Result<Self> {
        Self::HarmonicPolynomial { degree, amplitude: 1.0 }.validated()
    }

    /// Same function multiplied by `c`.
    pub fn scaled(self, c: f64) -> Self {
        match self {
            Self::DiscBump { center, radius, amplitude } => Self::DiscBump { center, radius, amplitude: amplitude * c },
            Self::UpperHalfBump { center, radius, amplitude } => {
                Self::UpperHalfBump { center, radius, amplitude: amplitude * c }
            }
            Self::IntervalBump { a, b, amplitude } => Self::IntervalBump { a, b, amplitude: amplitude * c },
            Self::HarmonicPolynomial { degree, amplitude } => {
                Self::HarmonicPolynomial { degree, amplitude: amplitude * c }
            }
        }
    }

    /// Checks that the closed support lies strictly inside the family's domain.
    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::DiscBump { center, radius, .. } => radius > 0.0 && center.norm() + radius < 1.0,
            Self::UpperHalfBump { center, radius, .. } => {
                radius > 0.0 && center.norm() + radius < 1.0 && center.im - radius > 0.0
            }
            Self::IntervalBump { a, b, .. } => -1.0 < a && a < b && b < 1.0,
            Self::HarmonicPolynomial { degree, .. } => degree >= 1,
        };
        let finite = match self {
            Self::DiscBump { center, radius, amplitude } | Self::UpperHalfBump { center, radius, amplitude } => {
                center.re.is_finite() && center.im.is_finite() && radius.is_finite() && amplitude.is_finite()
            }
            Self::IntervalBump { a, b, amplitude } => a.is_finite() && b.is_finite() && amplitude.is_finite(),
            Self::HarmonicPolynomial { amplitude, .. } => amplitude.is_finite(),
        };
        if ok && finite {
            Ok(self)
        } else {
            Err(Error::Support(self.to_string()))
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Self::DiscBump { amplitude, .. }
            | Self::UpperHalfBump { amplitude, .. }
            | Self::IntervalBump { amplitude, .. }
            | Self::HarmonicPolynomial { amplitude, .. } => amplitude,
        }
    }

    /// Whether the function lives on the real line only.
    pub fn is_line(&self) -> bool {
        matches!(self, Self::IntervalBump { .. })
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self, Self::HarmonicPolynomial { .. })
    }

    /// Bounding box `((x0, x1), (y0, y1))` of the support; the closed unit
    /// disc's box for harmonic polynomials. Interval bumps have `y0 = y1 = 0`.
    pub fn bounding_box(&self) -> ((f64, f64), (f64, f64)) {
        match *self {
            Self::DiscBump { center, radius, .. } | Self::UpperHalfBump { center, radius, .. } => {
                ((center.re - radius, center.re + radius), (center.im - radius, center.im + radius))
            }
            Self::IntervalBump { a, b, .. } => ((a, b), (0.0, 0.0)),
            Self::HarmonicPolynomial { .. } => ((-1.0, 1.0), (-1.0, 1.0)),
        }
    }

    /// `f(x, y)`. Interval bumps vanish off the real axis.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::DiscBump { center, radius, amplitude } | Self::UpperHalfBump { center, radius, amplitude } => {
                let (dx, dy) = (x - center.re, y - center.im);
                amplitude * radial_profile((dx * dx + dy * dy) / (radius * radius)).0
            }
            Self::IntervalBump { .. } => {
                if y != 0.0 {
                    0.0
                } else {
                    self.line_derivs(x).0
                }
            }
            Self::HarmonicPolynomial { degree, amplitude } => amplitude * Complex64::new(x, y).powu(degree).re,
        }
    }

    pub fn eval_z(&self, z: Complex64) -> f64 {
        self.eval(z.re, z.im)
    }

    /// `(f, f', f'')` along the real line for interval bumps (amplitude
    /// included); other families report `f''` as NaN.
    pub fn line_derivs(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            Self::IntervalBump { a, b, amplitude } => {
                let c = 2.0 / (b - a);
                let t = c * x - (a + b) / (b - a);
                if t.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let q = 1.0 - t * t;
                let f = (1.0 - 1.0 / q).exp();
                let p1 = -2.0 * t / (q * q);
                let p2 = -2.0 / (q * q) - 8.0 * t * t / q.powi(3);
                (amplitude * f, amplitude * c * p1 * f, amplitude * c * c * (p2 + p1 * p1) * f)
            }
            _ => (self.eval(x, 0.0), self.gradient(x, 0.0).0, f64::NAN),
        }
    }

    /// `(∂f/∂x, ∂f/∂y)`.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            Self::DiscBump { center, radius, amplitude } | Self::UpperHalfBump { center, radius, amplitude } => {
                let (dx, dy) = (x - center.re, y - center.im);
                let r2 = radius * radius;
                let g1 = radial_profile((dx * dx + dy * dy) / r2).1;
                let k = amplitude * 2.0 * g1 / r2;
                (k * dx, k * dy)
            }
            Self::IntervalBump { .. } => {
                if y != 0.0 {
                    (0.0, 0.0)
                } else {
                    (self.line_derivs(x).1, 0.0)
                }
            }
            Self::HarmonicPolynomial { degree, amplitude } => {
                // ∂x Re z^k = Re(k z^{k−1}), ∂y Re z^k = −Im(k z^{k−1})
                let d = Complex64::new(x, y).powu(degree - 1) * degree as f64 * amplitude;
                (d.re, -d.im)
            }
        }
    }

    /// `Δf = f_xx + f_yy` (second derivative along the line for interval bumps).
    pub fn laplacian(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::DiscBump { center, radius, amplitude } | Self::UpperHalfBump { center, radius, amplitude } => {
                let (dx, dy) = (x - center.re, y - center.im);
                let r2 = radius * radius;
                let s = (dx * dx + dy * dy) / r2;
                let (_, g1, g2) = radial_profile(s);
                amplitude * 4.0 / r2 * (g1 + s * g2)
            }
            Self::IntervalBump { .. } => {
                if y != 0.0 {
                    0.0
                } else {
                    self.line_derivs(x).2
                }
            }
            Self::HarmonicPolynomial { .. } => 0.0,
        }
    }
}
