use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::orbit::BackwardOrbit;
use super::winding::winding_number;
use crate::dynamics::{InversePair, QuadraticMap};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Minimum boundary sample count for a tube.
pub const MIN_SAMPLES: usize = 64;
/// Two candidate preimages whose distances to the predecessor differ by
/// less than this fraction of the step are indistinguishable.
pub const AMBIGUITY_TOL: f64 = 1e-3;
/// Substeps used to carry the anchor from `z₋ₙ` out to the boundary.
const ANCHOR_SUBSTEPS: usize = 64;
/// Vertex budget; each nonunivalent step doubles the boundary.
const MAX_VERTICES: usize = 1 << 18;

/// Why a tube stopped before the orbit depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeStop {
    Completed,
    /// The continuation could not tell the two preimages apart at this step.
    Ambiguous {
        step: usize,
    },
    VertexBudget {
        step: usize,
    },
}

/// Pullbacks of the disk `D(z₀, R₀)` along a backward orbit, tracked by
/// continuing a sampled boundary through the inverse branches.
///
/// `polylines[n]` is the boundary of `U₋ₙ`; applying `f` to its vertex `j`
/// gives vertex `j mod len` of `polylines[n-1]`. After a nonunivalent step
/// the boundary is traversed twice (the preimage of a curve winding around
/// the critical value is a single curve), but such depths are untrusted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackTube {
    pub center: Complex64,
    pub radius: f64,
    pub samples: usize,
    pub polylines: Vec<Vec<Complex64>>,
    /// `univalent[n - 1]` is the flag of the step `U₋ₙ₊₁ ← U₋ₙ`. On an
    /// ambiguous stop it also holds the flag of the failed step.
    pub univalent: Vec<bool>,
    pub first_nonunivalent: Option<usize>,
    pub stop: TubeStop,
}

impl PullbackTube {
    pub fn depth_reached(&self) -> usize {
        self.polylines.len() - 1
    }

    /// True when every step up to and including `n` was univalent.
    pub fn univalent_through(&self, n: usize) -> bool {
        n <= self.depth_reached() && self.first_nonunivalent.is_none_or(|k| k > n)
    }

    /// Smallest distance from a depth-`n` boundary vertex to `z`.
    pub fn min_vertex_distance(&self, n: usize, z: Complex64) -> f64 {
        self.polylines[n]
            .iter()
            .map(|v| (v - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|f(v) - v'|` over vertex pairs of consecutive depths.
    pub fn forward_mapping_error(&self, f: &QuadraticMap) -> f64 {
        let mut worst: f64 = 0.0;
        for n in 1..self.polylines.len() {
            let (cur, prev) = (&self.polylines[n], &self.polylines[n - 1]);
            for (j, v) in cur.iter().enumerate() {
                worst = worst.max((f.apply(*v) - prev[j % prev.len()]).norm());
            }
        }
        worst
    }

    pub fn summary(&self) -> TubeSummary {
        TubeSummary {
            center: self.center,
            radius: self.radius,
            samples: self.samples,
            depth_reached: self.depth_reached(),
            univalent: self.univalent.clone(),
            first_nonunivalent: self.first_nonunivalent,
            stop: self.stop,
            vertices: self.polylines.iter().map(Vec::len).collect(),
        }
    }
}

/// Polyline-free view of a tube, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSummary {
    pub center: Complex64,
    pub radius: f64,
    pub samples: usize,
    pub depth_reached: usize,
    pub univalent: Vec<bool>,
    pub first_nonunivalent: Option<usize>,
    pub stop: TubeStop,
    pub vertices: Vec<usize>,
}

/// Pick the candidate nearest `from`; `None` when the two are
/// indistinguishable. Starting exactly at the critical point both choices
/// are mirror images, so the plus branch is taken.
fn pick(pair: &InversePair, from: Complex64, critical: Complex64) -> Option<Complex64> {
    if (from - critical).norm() <= 1e-14 * critical.norm().max(1.0) {
        return Some(pair.plus);
    }
    let da = (pair.plus - from).norm();
    let db = (pair.minus - from).norm();
    let (near, dn, df) = if da <= db {
        (pair.plus, da, db)
    } else {
        (pair.minus, db, da)
    };
    if df - dn <= AMBIGUITY_TOL * dn && pair.plus != pair.minus {
        None
    } else {
        Some(near)
    }
}

pub fn pullback_tube(
    f: &QuadraticMap,
    orbit: &BackwardOrbit,
    radius: f64,
    samples: usize,
    exec: Exec,
) -> Result<PullbackTube> {
    if samples < MIN_SAMPLES {
        return Err(Error::domain(format!(
            "tube needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!(
            "tube radius {radius} must be positive"
        )));
    }
    let z0 = orbit.z0();
    let circle: Vec<Complex64> = (0..samples)
        .map(|j| {
            z0 + Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / samples as f64)
        })
        .collect();
    let mut tube = PullbackTube {
        center: z0,
        radius,
        samples,
        polylines: vec![circle],
        univalent: Vec::new(),
        first_nonunivalent: None,
        stop: TubeStop::Completed,
    };
    let cv = f.critical_value();
    let c0 = f.critical_point();

    for n in 1..=orbit.depth() {
        let prev = tube.polylines.last().unwrap();
        let len = prev.len();
        let winding = winding_number(prev, cv);
        let univalent = winding == 0;
        let sheets = if winding % 2 != 0 { 2 } else { 1 };
        if len * sheets > MAX_VERTICES {
            tube.stop = TubeStop::VertexBudget { step: n };
            break;
        }
        let pairs: Vec<InversePair> = exec.map_range(len, |j| f.inverse_images(prev[j]));

        // carry z₋ₙ along the segment from z₋ₙ₊₁ to its nearest boundary vertex
        let (prev_center, center) = (orbit.at(n - 1), orbit.at(n));
        let anchor = (0..len)
            .min_by(|&a, &b| {
                (prev[a] - prev_center)
                    .norm()
                    .total_cmp(&(prev[b] - prev_center).norm())
            })
            .unwrap();
        let mut q = center;
        let mut ok = true;
        for s in 1..=ANCHOR_SUBSTEPS {
            let t = s as f64 / ANCHOR_SUBSTEPS as f64;
            let w = prev_center + (prev[anchor] - prev_center) * t;
            let pair = if s == ANCHOR_SUBSTEPS {
                pairs[anchor]
            } else {
                f.inverse_images(w)
            };
            match pick(&pair, q, c0) {
                Some(next) => q = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }

        let total = len * sheets;
        let mut next = vec![Complex64::new(0.0, 0.0); total];
        if ok {
            next[anchor % total] = q;
            let mut last = q;
            for t in 1..total {
                let pos = (anchor + t) % total;
                match pick(&pairs[pos % len], last, c0) {
                    Some(v) => {
                        next[pos] = v;
                        last = v;
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
        }
        tube.univalent.push(univalent);
        if !univalent && tube.first_nonunivalent.is_none() {
            tube.first_nonunivalent = Some(n);
        }
        if !ok {
            tube.stop = TubeStop::Ambiguous { step: n };
            break;
        }
        tube.polylines.push(next);
    }
    Ok(tube)
}

/// Per-radius outcome of [`regularity_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusProbe {
    pub radius: f64,
    pub first_failure: Option<usize>,
    pub depth_reached: usize,
    pub stop: TubeStop,
    /// Univalent at every step after the allowed prefix, through the full
    /// orbit depth.
    pub univalent_after_prefix: bool,
}

/// Truncated evidence of regularity; never a proof either way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub label: String,
    pub orbit_depth: usize,
    pub allowed_prefix: usize,
    pub samples: usize,
    /// Largest tested radius whose tube is univalent after the prefix.
    pub max_univalent_radius: Option<f64>,
    pub probes: Vec<RadiusProbe>,
}

pub const EVIDENCE_LABEL: &str = "truncated evidence";

/// Pull back disks of each radius along `orbit` and record the first
/// nonunivalent step. Up to `allowed_prefix` initial nonunivalent steps are
/// tolerated.
pub fn regularity_probe(
    f: &QuadraticMap,
    orbit: &BackwardOrbit,
    radii: &[f64],
    samples: usize,
    allowed_prefix: usize,
    exec: Exec,
) -> Result<RegularityReport> {
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain("probe radii must be strictly decreasing"));
    }
    let mut probes = Vec::with_capacity(radii.len());
    for &radius in radii {
        let tube = pullback_tube(f, orbit, radius, samples, exec)?;
        let late_failure = tube
            .univalent
            .iter()
            .enumerate()
            .any(|(k, &u)| !u && k + 1 > allowed_prefix);
        let complete = tube.depth_reached() == orbit.depth();
        probes.push(RadiusProbe {
            radius,
            first_failure: tube.first_nonunivalent,
            depth_reached: tube.depth_reached(),
            stop: tube.stop,
            univalent_after_prefix: complete && !late_failure,
        });
    }
    let max_univalent_radius = probes
        .iter()
        .filter(|p| p.univalent_after_prefix)
        .map(|p| p.radius)
        .fold(None, |acc: Option<f64>, r| {
            Some(acc.map_or(r, |a| a.max(r)))
        });
    Ok(RegularityReport {
        label: EVIDENCE_LABEL.into(),
        orbit_depth: orbit.depth(),
        allowed_prefix,
        samples,
        max_univalent_radius,
        probes,
    })
}
