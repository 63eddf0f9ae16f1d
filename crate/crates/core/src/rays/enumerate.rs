use std::collections::{HashMap, HashSet};
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lift::{lift_ray, theta_admissible, LiftedRay, Ray, Termination};
use crate::dynamics::{BranchWord, MapForm, QuadraticMap};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Starting vertices closer than this are taken as equal.
pub const DISTINCT_TOL: f64 = 1e-9;
/// Deepest enumeration supported; `2ⁿ` lifts are materialized.
pub const MAX_LIFT_DEPTH: usize = 20;

pub const LIFT_SCHEMA: &str = "nexlab.lift-set/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftSet {
    pub schema: String,
    pub map: MapForm,
    pub ray: Ray,
    pub depth: usize,
    pub eps: f64,
    pub lifts: Vec<LiftedRay>,
    pub min_start_separation: Option<f64>,
}

/// All `2ⁿ` lifts of an admissible ray.
///
/// Fails with an obstruction error when the ray is not admissible at depth
/// `n`, and with an internal error when two lifts share a start vertex or
/// cross each other.
pub fn enumerate_lifts(
    f: &QuadraticMap,
    ray: &Ray,
    n: usize,
    eps: f64,
    exec: Exec,
) -> Result<LiftSet> {
    if n > MAX_LIFT_DEPTH {
        return Err(Error::domain(format!(
            "lift depth {n} exceeds {MAX_LIFT_DEPTH}"
        )));
    }
    let (ok, witness) = theta_admissible(f, ray, n, eps)?;
    if !ok {
        let w = witness.unwrap();
        return Err(Error::Obstruction {
            index: w.index,
            point: w.point,
            distance: w.distance,
        });
    }
    let lifts = exec
        .map_range(1 << n, |k| {
            lift_ray(f, ray, &BranchWord::from_index(k, n), eps)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = lifts
        .iter()
        .find(|l| l.termination != Termination::Completed)
    {
        return Err(Error::Internal(format!(
            "lift {} of an admissible ray ended {:?}",
            bad.word, bad.termination
        )));
    }
    let starts: Vec<Complex64> = lifts.iter().map(LiftedRay::start).collect();
    let min_start_separation = min_pair_distance(&starts);
    if let Some(d) = min_start_separation {
        if d <= DISTINCT_TOL {
            return Err(Error::Internal(format!(
                "two lifts start within {d:e} of each other"
            )));
        }
    }
    if let Some((a, b)) = first_crossing(&lifts) {
        return Err(Error::Internal(format!(
            "lifts {} and {} intersect",
            lifts[a].word, lifts[b].word
        )));
    }
    Ok(LiftSet {
        schema: LIFT_SCHEMA.into(),
        map: f.form(),
        ray: *ray,
        depth: n,
        eps,
        lifts,
        min_start_separation,
    })
}

/// Smallest pairwise distance, by a sweep along the real axis.
pub fn min_pair_distance(pts: &[Complex64]) -> Option<f64> {
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut best = f64::INFINITY;
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            if sorted[j].re - sorted[i].re >= best {
                break;
            }
            best = best.min((sorted[j] - sorted[i]).norm());
        }
    }
    (pts.len() >= 2).then_some(best)
}

fn orient(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    (b - a).re * (p - a).im - (b - a).im * (p - a).re
}

fn on_segment(a: Complex64, b: Complex64, p: Complex64) -> bool {
    p.re >= a.re.min(b.re)
        && p.re <= a.re.max(b.re)
        && p.im >= a.im.min(b.im)
        && p.im <= a.im.max(b.im)
}

fn segments_meet(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// First pair of distinct polylines sharing a point, found by bucketing
/// segments on a uniform grid.
fn first_crossing(lifts: &[LiftedRay]) -> Option<(usize, usize)> {
    let segs: Vec<(usize, Complex64, Complex64)> = lifts
        .iter()
        .enumerate()
        .flat_map(|(k, l)| l.polyline.windows(2).map(move |w| (k, w[0], w[1])))
        .collect();
    if segs.is_empty() || lifts.len() < 2 {
        return None;
    }
    let mean = segs.iter().map(|(_, a, b)| (b - a).norm()).sum::<f64>() / segs.len() as f64;
    let (mut lo, mut hi) = (segs[0].1, segs[0].1);
    for (_, a, b) in &segs {
        for p in [a, b] {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
    }
    let cell = mean.max((hi - lo).norm() / 4096.0).max(f64::MIN_POSITIVE);
    let key = |x: f64, y: f64| {
        (
            ((x - lo.re) / cell).floor() as i64,
            ((y - lo.im) / cell).floor() as i64,
        )
    };
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (s, (_, a, b)) in segs.iter().enumerate() {
        let (i0, j0) = key(a.re.min(b.re), a.im.min(b.im));
        let (i1, j1) = key(a.re.max(b.re), a.im.max(b.im));
        for i in i0..=i1 {
            for j in j0..=j1 {
                buckets.entry((i, j)).or_default().push(s);
            }
        }
    }
    let mut seen = HashSet::new();
    let mut cells: Vec<_> = buckets.into_iter().collect();
    cells.sort_unstable_by_key(|(k, _)| *k);
    for (_, ids) in cells {
        for x in 0..ids.len() {
            for y in x + 1..ids.len() {
                let (p, q) = (segs[ids[x]], segs[ids[y]]);
                if p.0 == q.0 || !seen.insert((ids[x], ids[y])) {
                    continue;
                }
                if segments_meet(p.1, p.2, q.1, q.2) {
                    return Some((p.0.min(q.0), p.0.max(q.0)));
                }
            }
        }
    }
    None
}

/// How each ray designates its branch at depth `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BranchSelector {
    /// Prefixes of one word per ray.
    Words {
        first: BranchWord,
        second: BranchWord,
    },
    /// The lift whose far end lies closest to the marker.
    NearestToMarker { marker: Complex64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Separation {
    Separated {
        depth: usize,
        first: Complex64,
        second: Complex64,
    },
    NotSeparated {
        n_max: usize,
    },
}

fn select(
    f: &QuadraticMap,
    ray: &Ray,
    n: usize,
    eps: f64,
    word: Option<&BranchWord>,
    marker: Complex64,
    exec: Exec,
) -> Result<LiftedRay> {
    match word {
        Some(w) => lift_ray(f, ray, &w.prefix(n), eps),
        None => {
            let set = enumerate_lifts(f, ray, n, eps, exec)?;
            let gap = |l: &LiftedRay| (l.polyline.last().unwrap() - marker).norm();
            Ok(set
                .lifts
                .into_iter()
                .min_by(|a, b| gap(a).total_cmp(&gap(b)))
                .unwrap())
        }
    }
}

/// First depth at which the designated start vertices of the two rays from
/// `z₀` differ by more than `ε`.
pub fn branch_separation_experiment(
    f: &QuadraticMap,
    first: &Ray,
    second: &Ray,
    n_max: usize,
    eps: f64,
    selector: &BranchSelector,
    exec: Exec,
) -> Result<Separation> {
    if first.base != second.base {
        return Err(Error::domain("both rays must share the base point"));
    }
    for ray in [first, second] {
        let (ok, w) = theta_admissible(f, ray, n_max, eps)?;
        if !ok {
            let w = w.unwrap();
            return Err(Error::Obstruction {
                index: w.index,
                point: w.point,
                distance: w.distance,
            });
        }
    }
    let (wa, wb, marker) = match selector {
        BranchSelector::Words { first, second } => {
            if first.len() < n_max || second.len() < n_max {
                return Err(Error::domain(format!(
                    "designated words must have length at least {n_max}"
                )));
            }
            (Some(first), Some(second), Complex64::new(0.0, 0.0))
        }
        BranchSelector::NearestToMarker { marker } => (None, None, *marker),
    };
    for n in 1..=n_max {
        let a = select(f, first, n, eps, wa, marker, exec)?.start();
        let b = select(f, second, n, eps, wb, marker, exec)?.start();
        if (a - b).norm() > eps {
            return Ok(Separation::Separated {
                depth: n,
                first: a,
                second: b,
            });
        }
    }
    Ok(Separation::NotSeparated { n_max })
}

/// SVG overlay of a lift set, with the critical orbit up to the lift depth.
pub fn write_svg<W: Write>(
    f: &QuadraticMap,
    set: &LiftSet,
    mut out: W,
    comment: &str,
) -> Result<()> {
    let pts = set.lifts.iter().flat_map(|l| l.polyline.iter());
    let (mut lo, mut hi) = (
        Complex64::new(f64::INFINITY, f64::INFINITY),
        Complex64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in pts {
        lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let pad = 0.05 * (hi - lo).norm().max(1e-6);
    let (x0, y0, w, h) = (
        lo.re - pad,
        -hi.im - pad,
        hi.re - lo.re + 2.0 * pad,
        hi.im - lo.im + 2.0 * pad,
    );
    let stroke = w.max(h) / 800.0;
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(out, "<!-- {} -->", comment.replace("--", "- -"))?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {w} {h}" width="800" height="{}">"#,
        (800.0 * h / w).round().max(1.0)
    )?;
    for l in &set.lifts {
        let d: Vec<String> = l
            .polyline
            .iter()
            .map(|z| format!("{},{}", z.re, -z.im))
            .collect();
        writeln!(
            out,
            r#"<polyline data-word="{}" fill="none" stroke="black" stroke-width="{stroke}" points="{}"/>"#,
            l.word,
            d.join(" ")
        )?;
    }
    let mut z = f.critical_point();
    for k in 1..=set.depth.max(1) {
        z = f.apply(z);
        if !(z.norm() < 1e6) {
            break;
        }
        writeln!(
            out,
            r#"<circle data-k="{k}" cx="{}" cy="{}" r="{}" fill="red"/>"#,
            z.re,
            -z.im,
            3.0 * stroke
        )?;
    }
    writeln!(out, "</svg>")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eight_lifts_start_at_eighth_roots_of_four() {
        let f = QuadraticMap::centered_real(0.0);
        let ray = Ray::new(c(4.0, 0.0), 0.0).unwrap();
        let set = enumerate_lifts(&f, &ray, 3, 1e-9, Exec::default()).unwrap();
        assert_eq!(set.lifts.len(), 8);
        for l in &set.lifts {
            let z = l.start();
            assert_abs_diff_eq!(z.norm(), 4f64.powf(0.125), epsilon = 1e-12);
            let z8 = z.powi(8);
            assert_abs_diff_eq!((z8 - c(4.0, 0.0)).norm(), 0.0, epsilon = 1e-10);
            assert!(l.forward_error(&f, &ray) < 1e-7);
        }
        assert!(set.min_start_separation.unwrap() > 0.5);
    }

    #[test]
    fn depth_zero_is_a_single_lift() {
        let f = QuadraticMap::centered_real(0.0);
        let ray = Ray::new(c(4.0, 0.0), 0.0).unwrap();
        let set = enumerate_lifts(&f, &ray, 0, 1e-9, Exec::default()).unwrap();
        assert_eq!(set.lifts.len(), 1);
        assert_eq!(set.lifts[0].start(), c(4.0, 0.0));
        assert_eq!(set.min_start_separation, None);
    }

    #[test]
    fn inadmissible_ray_is_rejected() {
        let f = QuadraticMap::centered_real(-1.0);
        let ray = Ray::new(c(1.0, 0.0), std::f64::consts::PI).unwrap();
        assert!(matches!(
            enumerate_lifts(&f, &ray, 2, 1e-9, Exec::default()),
            Err(Error::Obstruction { .. })
        ));
    }

    #[test]
    fn basilica_lifts_complete() {
        let f = QuadraticMap::centered_real(-1.0);
        let ray = Ray::new(c(1.0, 0.0), 0.0).unwrap();
        let a = enumerate_lifts(&f, &ray, 6, 1e-9, Exec::Sequential).unwrap();
        let b = enumerate_lifts(&f, &ray, 6, 1e-9, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lifts.len(), 64);
        assert!(a.lifts.iter().all(|l| l.forward_error(&f, &ray) < 1e-7));
    }

    #[test]
    fn crossing_detection() {
        let mk = |pts: Vec<Complex64>| LiftedRay {
            word: BranchWord::new(vec![]),
            polyline: pts,
            termination: Termination::Completed,
        };
        let a = mk(vec![c(0.0, 0.0), c(1.0, 1.0)]);
        let b = mk(vec![c(0.0, 1.0), c(1.0, 0.0)]);
        let d = mk(vec![c(0.0, 2.0), c(1.0, 2.0)]);
        assert_eq!(first_crossing(&[a.clone(), b]), Some((0, 1)));
        assert_eq!(first_crossing(&[a, d]), None);
    }

    #[test]
    fn min_pair_distance_matches_brute_force() {
        let pts: Vec<Complex64> = (0..50)
            .map(|k| c((k as f64 * 0.37).sin(), (k as f64 * 1.3).cos()))
            .collect();
        let mut brute = f64::INFINITY;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                brute = brute.min((pts[i] - pts[j]).norm());
            }
        }
        assert_eq!(min_pair_distance(&pts), Some(brute));
    }

    #[test]
    fn separation_examples() {
        let f = QuadraticMap::centered_real(0.0);
        let a = Ray::new(c(4.0, 0.0), 0.0).unwrap();
        let b = Ray::new(c(4.0, 0.0), std::f64::consts::FRAC_PI_2).unwrap();
        let sel = BranchSelector::Words {
            first: "+".parse().unwrap(),
            second: "-".parse().unwrap(),
        };
        let out = branch_separation_experiment(&f, &a, &b, 1, 1e-9, &sel, Exec::default()).unwrap();
        let Separation::Separated {
            depth,
            first,
            second,
        } = out
        else {
            panic!("{out:?}")
        };
        assert_eq!(depth, 1);
        assert_abs_diff_eq!(first.re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(second.re, -2.0, epsilon = 1e-12);

        let same = BranchSelector::Words {
            first: "+-+".parse().unwrap(),
            second: "+-+".parse().unwrap(),
        };
        let out =
            branch_separation_experiment(&f, &a, &a, 3, 1e-9, &same, Exec::default()).unwrap();
        assert_eq!(out, Separation::NotSeparated { n_max: 3 });
    }

    #[test]
    fn svg_lists_every_lift() {
        let f = QuadraticMap::centered_real(-1.0);
        let ray = Ray::new(c(1.0, 0.0), 0.0).unwrap();
        let set = enumerate_lifts(&f, &ray, 3, 1e-9, Exec::default()).unwrap();
        let mut buf = Vec::new();
        write_svg(&f, &set, &mut buf, "test").unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.matches("<polyline").count(), 8);
        assert!(s.trim_end().ends_with("</svg>"));
    }
}
