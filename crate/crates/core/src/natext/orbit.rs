use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    step_residual, Branch, BranchWord, PointCloud, QuadraticMap, CONSISTENCY_TOL,
    DEFAULT_ESCAPE_RADIUS,
};
use crate::error::{Error, Result};
use crate::raster::KRaster;

/// Forward escape test deciding membership in `C - K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeTest {
    pub max_iter: u32,
    pub escape_radius: f64,
}

impl Default for EscapeTest {
    fn default() -> Self {
        EscapeTest {
            max_iter: 1000,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        }
    }
}

impl EscapeTest {
    /// Use the generation parameters of a raster.
    pub fn from_raster(raster: &KRaster) -> Self {
        EscapeTest {
            max_iter: raster.max_iter(),
            escape_radius: raster.escape_radius(),
        }
    }

    pub fn escapes(&self, f: &QuadraticMap, z: Complex64) -> bool {
        f.escape_time(z, self.max_iter, self.escape_radius)
            .is_some()
    }
}

/// How each backward step picks one of the two preimages.
#[derive(Debug, Clone, Copy)]
pub enum Strategy<'a> {
    Word(&'a BranchWord),
    Random {
        seed: u64,
    },
    TowardTarget(Complex64),
    /// Preimage nearest the boundary cloud among those confirmed to escape.
    OutsideKNearestBoundary {
        boundary: &'a PointCloud,
        escape: EscapeTest,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyTag {
    ExplicitWord,
    Random,
    TowardTarget,
    OutsideKNearestBoundary,
}

impl Strategy<'_> {
    pub fn tag(&self) -> StrategyTag {
        match self {
            Strategy::Word(_) => StrategyTag::ExplicitWord,
            Strategy::Random { .. } => StrategyTag::Random,
            Strategy::TowardTarget(_) => StrategyTag::TowardTarget,
            Strategy::OutsideKNearestBoundary { .. } => StrategyTag::OutsideKNearestBoundary,
        }
    }
}

/// A truncated point `(z₀, z₋₁, ..., z₋ₙ)` of the natural extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardOrbit {
    points: Vec<Complex64>,
    word: BranchWord,
    strategy: StrategyTag,
    residual: f64,
}

impl BackwardOrbit {
    /// Assemble from explicit points, checking every step.
    pub fn from_points(f: &QuadraticMap, points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("backward orbit needs at least z0"));
        }
        let mut word = BranchWord::default();
        let mut residual: f64 = 0.0;
        for k in 1..points.len() {
            let r = step_residual(f, points[k], points[k - 1]);
            if !(r <= CONSISTENCY_TOL) {
                return Err(Error::Consistency {
                    index: k,
                    residual: r,
                });
            }
            residual = residual.max(r);
            word.push(f.inverse_images(points[k - 1]).nearest(points[k]).0);
        }
        Ok(BackwardOrbit {
            points,
            word,
            strategy: StrategyTag::ExplicitWord,
            residual,
        })
    }

    /// Orbit fixed at a point `p` with `f(p) = p`.
    pub fn constant(f: &QuadraticMap, p: Complex64, depth: usize) -> Result<Self> {
        Self::from_points(f, vec![p; depth + 1])
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn z0(&self) -> Complex64 {
        self.points[0]
    }

    /// `z₋ₙ`.
    pub fn at(&self, n: usize) -> Complex64 {
        self.points[n]
    }

    pub fn depth(&self) -> usize {
        self.points.len() - 1
    }

    pub fn word(&self) -> &BranchWord {
        &self.word
    }

    pub fn strategy(&self) -> StrategyTag {
        self.strategy
    }

    /// Largest relative step residual `|f(z₋ₖ₋₁) - z₋ₖ| / max(1, |z₋ₖ|)`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// The first `n + 1` points.
    pub fn truncate(&self, n: usize) -> BackwardOrbit {
        let n = n.min(self.depth());
        BackwardOrbit {
            points: self.points[..=n].to_vec(),
            word: self.word.prefix(n),
            strategy: self.strategy,
            residual: self.residual,
        }
    }
}

/// Extend `z₀` backward `depth` steps under `strategy`.
///
/// For [`Strategy::OutsideKNearestBoundary`], `z₀` must itself escape; if at
/// some depth neither preimage escapes, [`Error::StrategyStuck`] carries the
/// partial orbit.
pub fn extend_backward(
    f: &QuadraticMap,
    z0: Complex64,
    strategy: Strategy<'_>,
    depth: usize,
) -> Result<BackwardOrbit> {
    if !(z0.re.is_finite() && z0.im.is_finite()) {
        return Err(Error::domain("z0 must be finite"));
    }
    if let Strategy::Word(w) = strategy {
        if w.len() < depth {
            return Err(Error::domain(format!(
                "word of length {} shorter than depth {depth}",
                w.len()
            )));
        }
    }
    if let Strategy::OutsideKNearestBoundary { boundary, escape } = strategy {
        if boundary.is_empty() {
            return Err(Error::domain("empty boundary cloud"));
        }
        if !escape.escapes(f, z0) {
            return Err(Error::domain(format!(
                "z0 = {z0} does not escape; not in C - K"
            )));
        }
    }
    let mut rng = match strategy {
        Strategy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut points = Vec::with_capacity(depth + 1);
    points.push(z0);
    let mut word = BranchWord::default();
    let mut residual: f64 = 0.0;
    let mut cur = z0;
    for k in 0..depth {
        let pair = f.inverse_images(cur);
        let branch = match strategy {
            Strategy::Word(w) => w.bits()[k],
            Strategy::Random { .. } => {
                if rng.as_mut().unwrap().gen_bool(0.5) {
                    Branch::Plus
                } else {
                    Branch::Minus
                }
            }
            Strategy::TowardTarget(t) => pair.nearest(t).0,
            Strategy::OutsideKNearestBoundary { boundary, escape } => {
                let esc = [escape.escapes(f, pair.plus), escape.escapes(f, pair.minus)];
                match esc {
                    [true, true] => {
                        if boundary.distance(pair.plus) <= boundary.distance(pair.minus) {
                            Branch::Plus
                        } else {
                            Branch::Minus
                        }
                    }
                    [true, false] => Branch::Plus,
                    [false, true] => Branch::Minus,
                    [false, false] => {
                        return Err(Error::StrategyStuck {
                            depth: k + 1,
                            partial: Box::new(points),
                        })
                    }
                }
            }
        };
        let next = pair.get(branch);
        residual = residual.max(step_residual(f, next, cur));
        word.push(branch);
        points.push(next);
        cur = next;
    }
    if !(residual <= CONSISTENCY_TOL) {
        return Err(Error::Internal(format!(
            "backward orbit residual {residual:e}"
        )));
    }
    Ok(BackwardOrbit {
        points,
        word,
        strategy: strategy.tag(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::postcritical_cloud;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn explicit_word() {
        let f = QuadraticMap::centered_real(0.0);
        let w: BranchWord = "++".parse().unwrap();
        let o = extend_backward(&f, c(16.0, 0.0), Strategy::Word(&w), 2).unwrap();
        assert_eq!(o.points(), &[c(16.0, 0.0), c(4.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(o.word(), &w);
        assert_eq!(o.strategy(), StrategyTag::ExplicitWord);
    }

    #[test]
    fn toward_target() {
        let f = QuadraticMap::centered_real(0.0);
        let o = extend_backward(&f, c(4.0, 0.0), Strategy::TowardTarget(c(-1.0, 0.0)), 1).unwrap();
        assert_eq!(o.at(1), c(-2.0, 0.0));
    }

    #[test]
    fn random_is_seeded() {
        let f = QuadraticMap::siegel_golden();
        let a = extend_backward(&f, c(0.3, 1.1), Strategy::Random { seed: 9 }, 40).unwrap();
        let b = extend_backward(&f, c(0.3, 1.1), Strategy::Random { seed: 9 }, 40).unwrap();
        assert_eq!(a, b);
        assert!(a.residual() <= CONSISTENCY_TOL);
    }

    #[test]
    fn short_word_is_rejected() {
        let f = QuadraticMap::centered_real(0.0);
        let w: BranchWord = "+".parse().unwrap();
        assert!(extend_backward(&f, c(1.0, 0.0), Strategy::Word(&w), 3).is_err());
    }

    #[test]
    fn outside_k_orbit_stays_outside() {
        let f = QuadraticMap::siegel_golden();
        let cloud = postcritical_cloud(&f, 20_000).unwrap();
        let escape = EscapeTest::default();
        let z0 = f.critical_point() + c(0.0, 0.9);
        assert!(escape.escapes(&f, z0));
        let o = extend_backward(
            &f,
            z0,
            Strategy::OutsideKNearestBoundary {
                boundary: &cloud,
                escape,
            },
            60,
        )
        .unwrap();
        assert!(o.points().iter().all(|&z| escape.escapes(&f, z)));
        let r0 = cloud.distance(o.z0());
        let rn = cloud.distance(o.at(60));
        assert!(rn < r0, "{r0} -> {rn}");
    }

    #[test]
    fn outside_k_needs_escaping_start() {
        let f = QuadraticMap::siegel_golden();
        let cloud = postcritical_cloud(&f, 100).unwrap();
        let s = Strategy::OutsideKNearestBoundary {
            boundary: &cloud,
            escape: EscapeTest::default(),
        };
        assert!(extend_backward(&f, c(0.0, 0.0), s, 3).is_err());
    }

    #[test]
    fn from_points_detects_inconsistency() {
        let f = QuadraticMap::centered_real(0.0);
        assert!(matches!(
            BackwardOrbit::from_points(&f, vec![c(16.0, 0.0), c(4.0, 0.0), c(2.5, 0.0)]),
            Err(Error::Consistency { index: 2, .. })
        ));
        let o = BackwardOrbit::from_points(&f, vec![c(16.0, 0.0), c(-4.0, 0.0)]).unwrap();
        assert_eq!(o.word().to_bit_string(), "1");
    }
}
