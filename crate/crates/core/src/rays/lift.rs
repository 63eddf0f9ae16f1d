use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BranchWord, QuadraticMap};
use crate::error::{Error, Result};

pub const DEFAULT_R_MAX: f64 = 1e3;
/// Steps shorter than this fraction of `1 + |z|` count as a failure to
/// resolve the continuation.
const MIN_RELATIVE_STEP: f64 = 1e-13;
/// Forward images of the critical point beyond this are treated as gone.
const CO_OVERFLOW: f64 = 1e150;

/// Truncated half-line `{z₀ + t e^{iθ} : 0 <= t, |z| <= R_max}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub base: Complex64,
    pub angle: f64,
    pub r_max: f64,
    /// First arclength step of the continuation.
    pub initial_step: f64,
    /// Step multiplier on refinement, in (0, 1); its inverse is the growth
    /// factor after an accepted step.
    pub refinement: f64,
}

impl Ray {
    pub fn new(base: Complex64, angle: f64) -> Result<Self> {
        Ray {
            base,
            angle,
            r_max: DEFAULT_R_MAX,
            initial_step: 1e-2,
            refinement: 0.5,
        }
        .validated()
    }

    pub fn with_r_max(self, r_max: f64) -> Result<Self> {
        Ray { r_max, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.r_max > 0.0) || !self.r_max.is_finite() {
            return Err(Error::domain(format!(
                "ray truncation radius {} must be positive",
                self.r_max
            )));
        }
        if !(self.base.norm() < self.r_max) {
            return Err(Error::domain(format!(
                "ray base {} lies beyond R_max = {}",
                self.base, self.r_max
            )));
        }
        if !(self.initial_step > 0.0) || !(self.refinement > 0.0 && self.refinement < 1.0) {
            return Err(Error::domain(
                "ray step control must be positive with refinement in (0, 1)",
            ));
        }
        if !self.angle.is_finite() || !self.base.is_finite() {
            return Err(Error::domain("ray base and angle must be finite"));
        }
        Ok(self)
    }

    pub fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }

    /// Parameter at which the ray meets `|z| = R_max`.
    pub fn length(&self) -> f64 {
        let u = self.direction();
        let b = (self.base * u.conj()).re;
        -b + (b * b - self.base.norm_sqr() + self.r_max * self.r_max).sqrt()
    }

    pub fn at(&self, t: f64) -> Complex64 {
        self.base + self.direction() * t
    }

    /// Distance from `z` to the truncated ray, with the parameter of the
    /// closest point.
    pub fn distance(&self, z: Complex64) -> (f64, f64) {
        let t = ((z - self.base) * self.direction().conj())
            .re
            .clamp(0.0, self.length());
        ((z - self.at(t)).norm(), t)
    }
}

/// A point of the forward critical orbit close to a ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstructionHit {
    /// `k` in `fᵏ(c₀)`, starting at 1.
    pub index: usize,
    pub point: Complex64,
    pub distance: f64,
    /// Ray parameter of the closest approach.
    pub t: f64,
}

/// Critical-orbit points within `ε` of a ray, in order along the ray.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObstructionSet {
    pub hits: Vec<ObstructionHit>,
}

impl ObstructionSet {
    pub fn find(f: &QuadraticMap, ray: &Ray, depth: usize, eps: f64) -> Self {
        let mut hits = Vec::new();
        let mut z = f.critical_point();
        for k in 1..=depth {
            z = f.apply(z);
            if !(z.norm() < CO_OVERFLOW) {
                break;
            }
            let (distance, t) = ray.distance(z);
            if distance <= eps {
                hits.push(ObstructionHit {
                    index: k,
                    point: z,
                    distance,
                    t,
                });
            }
        }
        hits.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.index.cmp(&b.index)));
        ObstructionSet { hits }
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn first(&self) -> Option<&ObstructionHit> {
        self.hits.first()
    }
}

/// Whether the ray avoids the critical orbit `{fᵏ(c₀) : 1 <= k <= depth}`
/// by more than `ε`. On failure the witness is the first offender along the
/// ray.
pub fn theta_admissible(
    f: &QuadraticMap,
    ray: &Ray,
    depth: usize,
    eps: f64,
) -> Result<(bool, Option<ObstructionHit>)> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("tolerance {eps} must be positive")));
    }
    let set = ObstructionSet::find(f, ray, depth, eps);
    Ok((set.is_empty(), set.first().copied()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    /// The base ray passes within `ε` of `f^index(c₀)`, a branch point of
    /// the depth-`n` inverse.
    Obstructed {
        index: usize,
        point: Complex64,
        distance: f64,
    },
    /// Step refinement hit its floor at this base point.
    Ambiguous {
        at: Complex64,
    },
}

/// Lift of a truncated ray along one branch word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedRay {
    pub word: BranchWord,
    #[serde(with = "flat")]
    pub polyline: Vec<Complex64>,
    pub termination: Termination,
}

impl LiftedRay {
    pub fn start(&self) -> Complex64 {
        self.polyline[0]
    }

    pub fn depth(&self) -> usize {
        self.word.len()
    }

    /// Largest `dist(fⁿ(v), ray) / (1 + |fⁿ(v)|)` over the vertices.
    pub fn forward_error(&self, f: &QuadraticMap, ray: &Ray) -> f64 {
        self.polyline
            .iter()
            .map(|&v| {
                let w = f.iterate(v, self.depth());
                ray.distance(w).0 / (1.0 + w.norm())
            })
            .fold(0.0, f64::max)
    }
}

mod flat {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(pts: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        pts.iter()
            .flat_map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let xs = Vec::<f64>::deserialize(d)?;
        if xs.len() % 2 != 0 {
            return Err(serde::de::Error::custom("odd coordinate count"));
        }
        Ok(xs.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
    }
}

/// Depth-`n` preimage chain: `chain[k]` is the level-`k+1` preimage.
fn initial_chain(f: &QuadraticMap, z0: Complex64, word: &BranchWord) -> Vec<Complex64> {
    let mut z = z0;
    word.bits()
        .iter()
        .map(|&b| {
            z = f.inverse(z, b);
            z
        })
        .collect()
}

/// Move the chain to the new base point `w`; `None` asks for a smaller step.
fn advance(
    f: &QuadraticMap,
    chain: &[Complex64],
    w: Complex64,
    eps: f64,
) -> Option<Vec<Complex64>> {
    let mut next = Vec::with_capacity(chain.len());
    let mut target = w;
    for &old in chain {
        let pair = f.inverse_images(target);
        let sep = (pair.plus - pair.minus).norm();
        let (_, picked) = pair.nearest(old);
        let moved = (picked - old).norm();
        if sep < 10.0 * eps || moved > 0.25 * sep {
            return None;
        }
        next.push(picked);
        target = picked;
    }
    Some(next)
}

/// Continue the inverse-branch composition named by `word` along `ray`,
/// starting from its depth-`n` preimage of the base point.
///
/// The lift stops short of the first critical-orbit point of index at most
/// `n` that lies within `eps` of the ray.
pub fn lift_ray(f: &QuadraticMap, ray: &Ray, word: &BranchWord, eps: f64) -> Result<LiftedRay> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("tolerance {eps} must be positive")));
    }
    let ray = ray.validated()?;
    let n = word.len();
    let mut chain = initial_chain(f, ray.base, word);
    let start = chain.last().copied().unwrap_or(ray.base);
    let mut polyline = vec![start];

    let obstruction = ObstructionSet::find(f, &ray, n, eps).first().copied();
    let end = match obstruction {
        Some(hit) => (hit.t - eps).max(0.0),
        None => ray.length(),
    };
    let mut termination = match obstruction {
        Some(hit) => Termination::Obstructed {
            index: hit.index,
            point: hit.point,
            distance: hit.distance,
        },
        None => Termination::Completed,
    };

    let mut t = 0.0;
    let mut h = ray.initial_step;
    while t < end {
        let here = ray.at(t);
        let step = h.min(end - t);
        if step < MIN_RELATIVE_STEP * (1.0 + here.norm()) && t + step < end {
            termination = Termination::Ambiguous { at: here };
            break;
        }
        let w = ray.at(t + step);
        if n == 0 {
            polyline.push(w);
            t += step;
            h = (h / ray.refinement).min(0.25 * (1.0 + w.norm()));
            continue;
        }
        match advance(f, &chain, w, eps) {
            Some(next) => {
                chain = next;
                polyline.push(*chain.last().unwrap());
                t += step;
                h = (h / ray.refinement).min(0.25 * (1.0 + w.norm()));
            }
            None => {
                if step <= MIN_RELATIVE_STEP * (1.0 + here.norm()) {
                    termination = Termination::Ambiguous { at: here };
                    break;
                }
                h = step * ray.refinement;
            }
        }
    }
    Ok(LiftedRay {
        word: word.clone(),
        polyline,
        termination,
    })
}
