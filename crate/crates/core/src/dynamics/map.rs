use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::branch::Branch;
use super::rotation::RotationNumber;
use crate::error::{Error, Result};

/// Default escape radius used by orbit and raster code.
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e3;

/// The two quadratic families handled by the library.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum MapForm {
    /// `f(z) = λ z + z²` with `λ = e^{2πiθ}`.
    Siegel { theta: f64 },
    /// `f(z) = z² + c`.
    Centered { c: Complex64 },
}

/// A quadratic polynomial with its critical data precomputed.
///
/// For the Siegel form, `theta` is the stored source of truth and the
/// multiplier is derived from it once at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "MapForm", try_from = "MapForm")]
pub struct QuadraticMap {
    form: MapForm,
    lambda: Complex64,
    critical_point: Complex64,
    critical_value: Complex64,
}

impl QuadraticMap {
    /// `f(z) = e^{2πiθ} z + z²`.
    pub fn siegel(theta: f64) -> Self {
        let lambda = Complex64::from_polar(1.0, TAU * theta);
        let critical_point = -lambda / 2.0;
        let critical_value = -lambda * lambda / 4.0;
        QuadraticMap {
            form: MapForm::Siegel { theta },
            lambda,
            critical_point,
            critical_value,
        }
    }

    pub fn siegel_golden() -> Self {
        Self::siegel(RotationNumber::golden().value())
    }

    /// `f(z) = z² + c`.
    pub fn centered(c: Complex64) -> Self {
        QuadraticMap {
            form: MapForm::Centered { c },
            lambda: Complex64::new(0.0, 0.0),
            critical_point: Complex64::new(0.0, 0.0),
            critical_value: c,
        }
    }

    pub fn centered_real(c: f64) -> Self {
        Self::centered(Complex64::new(c, 0.0))
    }

    pub fn form(&self) -> MapForm {
        self.form
    }

    pub fn is_siegel(&self) -> bool {
        matches!(self.form, MapForm::Siegel { .. })
    }

    /// Linear coefficient: `λ` for the Siegel form, `0` for the centered form.
    pub fn linear_coefficient(&self) -> Complex64 {
        self.lambda
    }

    /// Constant coefficient: `0` for the Siegel form, `c` for the centered form.
    pub fn constant_coefficient(&self) -> Complex64 {
        match self.form {
            MapForm::Siegel { .. } => Complex64::new(0.0, 0.0),
            MapForm::Centered { c } => c,
        }
    }

    pub fn critical_point(&self) -> Complex64 {
        self.critical_point
    }

    pub fn critical_value(&self) -> Complex64 {
        self.critical_value
    }

    #[inline]
    pub fn apply(&self, z: Complex64) -> Complex64 {
        z * (z + self.lambda) + self.constant_coefficient()
    }

    #[inline]
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.lambda + 2.0 * z
    }

    /// `(f(z), f'(z))`.
    #[inline]
    pub fn evaluate(&self, z: Complex64) -> (Complex64, Complex64) {
        (self.apply(z), self.derivative(z))
    }

    /// The two roots of `f(z) = w`, labelled by branch.
    ///
    /// `Plus` is `-λ/2 + s/2` and `Minus` is `-λ/2 - s/2` where `s` is the
    /// principal square root of the discriminant; for the centered form this
    /// is `±sqrt(w - c)` with the principal root first. The larger-magnitude
    /// root is computed directly and the other from the product of roots,
    /// which keeps both accurate near `w = 0`.
    pub fn inverse_images(&self, w: Complex64) -> InversePair {
        let lambda = self.lambda;
        let disc = lambda * lambda + 4.0 * (w - self.constant_coefficient());
        let s = disc.sqrt();
        let half_lambda = lambda / 2.0;
        let plus_naive = -half_lambda + s / 2.0;
        let minus_naive = -half_lambda - s / 2.0;
        let product = -(w - self.constant_coefficient());
        let (plus, minus) = if plus_naive.norm_sqr() >= minus_naive.norm_sqr() {
            let other = if plus_naive.norm_sqr() > 0.0 {
                product / plus_naive
            } else {
                minus_naive
            };
            (plus_naive, other)
        } else {
            (product / minus_naive, minus_naive)
        };
        InversePair { plus, minus }
    }

    /// One backward step along `branch`.
    pub fn inverse(&self, w: Complex64, branch: Branch) -> Complex64 {
        self.inverse_images(w).get(branch)
    }

    /// Forward orbit `[z, f(z), ..., f^n(z)]`, stopping after the first
    /// point whose modulus exceeds `escape_radius`.
    pub fn forward_orbit(&self, z: Complex64, n: usize, escape_radius: f64) -> ForwardOrbit {
        let mut points = Vec::with_capacity(n + 1);
        let mut cur = z;
        points.push(cur);
        let mut escaped = cur.norm() > escape_radius;
        if !escaped {
            for _ in 0..n {
                cur = self.apply(cur);
                points.push(cur);
                if cur.norm() > escape_radius {
                    escaped = true;
                    break;
                }
            }
        }
        ForwardOrbit { points, escaped }
    }

    /// Number of iterations before `|f^k(z)| > escape_radius`, or `None` if
    /// the orbit stays bounded for `max_iter` steps.
    #[inline]
    pub fn escape_time(&self, z: Complex64, max_iter: u32, escape_radius: f64) -> Option<u32> {
        let r2 = escape_radius * escape_radius;
        let mut cur = z;
        if cur.norm_sqr() > r2 {
            return Some(0);
        }
        for k in 1..=max_iter {
            cur = self.apply(cur);
            if cur.norm_sqr() > r2 {
                return Some(k);
            }
        }
        None
    }

    /// `f^n(z)` without bookkeeping.
    pub fn iterate(&self, z: Complex64, n: usize) -> Complex64 {
        (0..n).fold(z, |acc, _| self.apply(acc))
    }

    /// Repelling fixed point: `1 - λ` (Siegel form) or `(1 + sqrt(1 - 4c))/2`.
    pub fn beta_fixed_point(&self) -> Complex64 {
        match self.form {
            MapForm::Siegel { .. } => Complex64::new(1.0, 0.0) - self.lambda,
            MapForm::Centered { c } => (Complex64::new(1.0, 0.0) + (1.0 - 4.0 * c).sqrt()) / 2.0,
        }
    }
}

impl From<QuadraticMap> for MapForm {
    fn from(f: QuadraticMap) -> Self {
        f.form
    }
}

impl TryFrom<MapForm> for QuadraticMap {
    type Error = Error;

    fn try_from(form: MapForm) -> Result<Self> {
        match form {
            MapForm::Siegel { theta } if theta.is_finite() => Ok(QuadraticMap::siegel(theta)),
            MapForm::Centered { c } if c.re.is_finite() && c.im.is_finite() => {
                Ok(QuadraticMap::centered(c))
            }
            _ => Err(Error::Config(format!("invalid map parameters {form:?}"))),
        }
    }
}

/// The two preimages of a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversePair {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl InversePair {
    pub fn get(&self, branch: Branch) -> Complex64 {
        match branch {
            Branch::Plus => self.plus,
            Branch::Minus => self.minus,
        }
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.plus, self.minus]
    }

    /// The preimage closer to `target`, with its branch label.
    pub fn nearest(&self, target: Complex64) -> (Branch, Complex64) {
        if (self.plus - target).norm_sqr() <= (self.minus - target).norm_sqr() {
            (Branch::Plus, self.plus)
        } else {
            (Branch::Minus, self.minus)
        }
    }
}

/// Result of [`QuadraticMap::forward_orbit`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOrbit {
    pub points: Vec<Complex64>,
    pub escaped: bool,
}

/// `|f(z₋ₖ₋₁) - z₋ₖ| <= CONSISTENCY_TOL * max(1, |z₋ₖ|)` for a consistent orbit.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Residual of one backward step, relative to `max(1, |w|)`.
pub fn step_residual(f: &QuadraticMap, pre: Complex64, w: Complex64) -> f64 {
    (f.apply(pre) - w).norm() / w.norm().max(1.0)
}

/// `|Dfⁿ(z₋ₙ)|` for `n = 0..=depth` along a backward orbit, checking
/// consistency of every step.
pub fn derivative_chain(f: &QuadraticMap, points: &[Complex64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(points.len());
    out.push(1.0);
    let mut acc = 1.0;
    for k in 1..points.len() {
        let residual = step_residual(f, points[k], points[k - 1]);
        if !(residual <= CONSISTENCY_TOL) {
            return Err(Error::Consistency { index: k, residual });
        }
        acc *= f.derivative(points[k]).norm();
        out.push(acc);
    }
    Ok(out)
}
