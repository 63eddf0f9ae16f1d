use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::orbit::{BackwardOrbit, StrategyTag};
use super::tube::{pullback_tube, TubeSummary};
use crate::dynamics::{derivative_chain, MapForm, PointCloud, QuadraticMap};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::raster::{delta, DistanceField};

pub const LEAF_SCHEMA: &str = "nexlab.leaf-type-report/1";

/// Tracks `R_n * D_n` only; no constant relating it to the hyperbolic norm
/// is claimed.
pub const PRODUCT_NOTE: &str = "product R_n*D_n is a lower-bound proxy for the hyperbolic norm \
     of the leaf at z_-n, comparable up to an unspecified constant; only R_n*D_n is tracked";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafParams {
    /// Shrink factor for the inner disk in the witness check, in (0, 1).
    pub s: f64,
    /// Boundary samples for the pullback tube.
    pub samples: usize,
    /// Relative slack on the Koebe inequality.
    pub koebe_tol: f64,
}

impl Default for LeafParams {
    fn default() -> Self {
        LeafParams {
            s: 0.5,
            samples: 128,
            koebe_tol: 1e-2,
        }
    }
}

/// Comparison of `delta_{x_n}(2 R_n)` against `s R_0 v_n / 4`, where `x_n`
/// is the cloud point nearest `z_-n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Complex64,
    pub delta: f64,
    pub bound: f64,
    pub holds: bool,
    pub clipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafRecord {
    pub depth: usize,
    pub r: f64,
    pub d: f64,
    pub v: f64,
    pub product: f64,
    pub ratio: f64,
    /// `None` past the depth the tube reached.
    pub univalent: Option<bool>,
    /// Evaluated only while the tube has been univalent so far.
    pub koebe: Option<bool>,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeafSummary {
    pub max_product: f64,
    pub max_growth: f64,
    /// Longest strictly increasing subsequence of the products.
    pub monotone_length: usize,
    pub min_ratio: f64,
    pub koebe_checked: usize,
    pub koebe_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafMetadata {
    pub map: MapForm,
    pub z0: Complex64,
    pub depth: usize,
    pub strategy: StrategyTag,
    pub word: String,
    pub r0: f64,
    pub cloud_size: usize,
    pub params: LeafParams,
    pub tube: TubeSummary,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "LeafDoc", try_from = "LeafDoc")]
pub struct LeafTypeReport {
    pub metadata: LeafMetadata,
    pub records: Vec<LeafRecord>,
    pub summary: LeafSummary,
}

impl LeafTypeReport {
    /// Depths at which the product exceeds `factor` times its depth-0 value.
    pub fn exceeding(&self, factor: f64) -> Vec<usize> {
        let p0 = self.records[0].product;
        self.records
            .iter()
            .filter(|r| r.product > factor * p0)
            .map(|r| r.depth)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "depth,r,d,v,product,ratio,univalent,koebe,witness_delta,witness_bound,witness_holds"
        )?;
        let opt = |b: Option<bool>| b.map_or(String::new(), |b| b.to_string());
        for r in &self.records {
            let (wd, wb, wh) = match r.witness {
                Some(w) => (
                    w.delta.to_string(),
                    w.bound.to_string(),
                    w.holds.to_string(),
                ),
                None => Default::default(),
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.depth,
                r.r,
                r.d,
                r.v,
                r.product,
                r.ratio,
                opt(r.univalent),
                opt(r.koebe),
                wd,
                wb,
                wh
            )?;
        }
        Ok(())
    }
}

/// Column-major JSON layout: one array per record field.
#[derive(Serialize, Deserialize)]
struct LeafDoc {
    schema: String,
    metadata: LeafMetadata,
    depth: Vec<usize>,
    r: Vec<f64>,
    d: Vec<f64>,
    v: Vec<f64>,
    product: Vec<f64>,
    ratio: Vec<f64>,
    univalent: Vec<Option<bool>>,
    koebe: Vec<Option<bool>>,
    witness: Vec<Option<Witness>>,
    summary: LeafSummary,
}

impl From<LeafTypeReport> for LeafDoc {
    fn from(rep: LeafTypeReport) -> Self {
        let col = |g: fn(&LeafRecord) -> f64| rep.records.iter().map(g).collect::<Vec<_>>();
        LeafDoc {
            schema: LEAF_SCHEMA.into(),
            depth: rep.records.iter().map(|r| r.depth).collect(),
            r: col(|r| r.r),
            d: col(|r| r.d),
            v: col(|r| r.v),
            product: col(|r| r.product),
            ratio: col(|r| r.ratio),
            univalent: rep.records.iter().map(|r| r.univalent).collect(),
            koebe: rep.records.iter().map(|r| r.koebe).collect(),
            witness: rep.records.iter().map(|r| r.witness).collect(),
            metadata: rep.metadata,
            summary: rep.summary,
        }
    }
}

impl TryFrom<LeafDoc> for LeafTypeReport {
    type Error = String;

    fn try_from(doc: LeafDoc) -> std::result::Result<Self, String> {
        if doc.schema != LEAF_SCHEMA {
            return Err(format!("unknown schema {:?}", doc.schema));
        }
        let n = doc.depth.len();
        let lens = [
            doc.r.len(),
            doc.d.len(),
            doc.v.len(),
            doc.product.len(),
            doc.ratio.len(),
            doc.univalent.len(),
            doc.koebe.len(),
            doc.witness.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err("column lengths differ".into());
        }
        let records = (0..n)
            .map(|k| LeafRecord {
                depth: doc.depth[k],
                r: doc.r[k],
                d: doc.d[k],
                v: doc.v[k],
                product: doc.product[k],
                ratio: doc.ratio[k],
                univalent: doc.univalent[k],
                koebe: doc.koebe[k],
                witness: doc.witness[k],
            })
            .collect();
        Ok(LeafTypeReport {
            metadata: doc.metadata,
            records,
            summary: doc.summary,
        })
    }
}

fn longest_increasing(xs: &[f64]) -> usize {
    let mut tails: Vec<f64> = Vec::new();
    for &x in xs {
        let k = tails.partition_point(|&t| t < x);
        if k == tails.len() {
            tails.push(x);
        } else {
            tails[k] = x;
        }
    }
    tails.len()
}

/// Per-depth leaf-type record along `orbit`: distance `R_n` of `z_-n` to the
/// boundary cloud, `D_n = |Df^n(z_-n)|`, and the Koebe cross-check against
/// the pullback tube of `D(z_0, R_0)`.
pub fn leaf_type_report(
    f: &QuadraticMap,
    orbit: &BackwardOrbit,
    boundary: &PointCloud,
    field: Option<&DistanceField>,
    params: LeafParams,
    exec: Exec,
) -> Result<LeafTypeReport> {
    if boundary.is_empty() {
        return Err(Error::domain("boundary cloud is empty"));
    }
    if !(params.s > 0.0 && params.s < 1.0) {
        return Err(Error::domain(format!(
            "s = {} must lie in (0, 1)",
            params.s
        )));
    }
    let r0 = boundary.distance(orbit.z0());
    if !(r0 > 0.0) {
        return Err(Error::domain("z0 lies on the boundary cloud"));
    }
    let chain = derivative_chain(f, orbit.points())?;
    let tube = pullback_tube(f, orbit, r0, params.samples, exec)?;

    let nearest: Vec<_> = exec.map_range(orbit.depth() + 1, |n| {
        boundary.nearest(orbit.at(n)).unwrap()
    });
    let mut records = Vec::with_capacity(nearest.len());
    for (n, near) in nearest.into_iter().enumerate() {
        let r = near.distance;
        let d = chain[n];
        let v = 1.0 / d;
        let univalent = (n <= tube.depth_reached()).then(|| n == 0 || tube.univalent[n - 1]);
        let koebe = tube
            .univalent_through(n)
            .then(|| r0 * v / 4.0 <= r * (1.0 + params.koebe_tol));
        let witness = match field {
            Some(field) if r > 0.0 => {
                let dl = delta(near.point, 2.0 * r, field)?;
                let bound = params.s * r0 * v / 4.0;
                Some(Witness {
                    x: near.point,
                    delta: dl.value,
                    bound,
                    holds: dl.value >= bound,
                    clipped: dl.clipped,
                })
            }
            _ => None,
        };
        records.push(LeafRecord {
            depth: n,
            r,
            d,
            v,
            product: r * d,
            ratio: v / r,
            univalent,
            koebe,
            witness,
        });
    }

    let products: Vec<f64> = records.iter().map(|r| r.product).collect();
    let max_product = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = LeafSummary {
        max_product,
        max_growth: max_product / products[0],
        monotone_length: longest_increasing(&products),
        min_ratio: records
            .iter()
            .map(|r| r.ratio)
            .fold(f64::INFINITY, f64::min),
        koebe_checked: records.iter().filter(|r| r.koebe.is_some()).count(),
        koebe_violations: records.iter().filter(|r| r.koebe == Some(false)).count(),
    };
    Ok(LeafTypeReport {
        metadata: LeafMetadata {
            map: f.form(),
            z0: orbit.z0(),
            depth: orbit.depth(),
            strategy: orbit.strategy(),
            word: orbit.word().to_bit_string(),
            r0,
            cloud_size: boundary.len(),
            params,
            tube: tube.summary(),
            note: PRODUCT_NOTE.into(),
        },
        records,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicBound {
    pub distance: f64,
    /// Upper bound `1/d(z, boundary)` on the hyperbolic density.
    pub upper: f64,
    pub note: String,
}

pub fn hyperbolic_norm_bounds(z: Complex64, boundary: &PointCloud) -> Result<HyperbolicBound> {
    if boundary.is_empty() {
        return Err(Error::domain("boundary cloud is empty"));
    }
    let distance = boundary.distance(z);
    if !(distance > 0.0) {
        return Err(Error::domain(format!("{z} lies on the boundary cloud")));
    }
    Ok(HyperbolicBound {
        distance,
        upper: 1.0 / distance,
        note: PRODUCT_NOTE.into(),
    })
}
