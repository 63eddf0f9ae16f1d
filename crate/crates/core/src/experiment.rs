//! Experiment presets, their JSON configuration, and report bundles.
//!
//! A bundle is a directory holding `config.json`, the preset outputs, and a
//! `timing.json` sidecar. Everything except the sidecar and the comment
//! headers of PGM/SVG files is a pure function of the config.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{postcritical_cloud, BranchWord, QuadraticMap};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::feigenbaum::derive_feigenbaum_parameter;
use crate::natext::{
    extend_backward, leaf_type_report, regularity_probe, EscapeTest, LeafParams, Strategy,
};
use crate::raster::{
    deepness_profile, distance_transform, fill_raster_with, fit_power_law, read_nexr_file,
    write_nexr_file, write_pgm, DeepnessProfile, DistanceField, KRaster, Membership, Window,
};
use crate::rays::{branch_separation_experiment, enumerate_lifts, write_svg, BranchSelector, Ray};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEEPNESS_SCHEMA: &str = "nexlab.deepness/1";
pub const LEAFCHECK_SCHEMA: &str = "nexlab.leafcheck/1";
pub const REGULARITY_SCHEMA: &str = "nexlab.regularity/1";
pub const RAYS_SCHEMA: &str = "nexlab.rays/1";
pub const RASTER_SCHEMA: &str = "nexlab.raster/1";
pub const FEIGENBAUM_SCHEMA: &str = "nexlab.feigenbaum/1";

/// Frozen column order of `profiles.csv`.
pub const PROFILE_COLUMNS: &str = "point,x_re,x_im,radius,delta_over_r,density,clipped";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Raster,
    SiegelDeepness,
    FeigenbaumDeepness,
    Leafcheck,
    Rays,
    Regularity,
    Feigenbaum,
}

/// The map, with the Feigenbaum parameter derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum MapSpec {
    Siegel {
        theta: f64,
    },
    Centered {
        c: Complex64,
    },
    /// `z² + c_F` with `c_F` extrapolated from `levels` superstable parameters.
    Feigenbaum {
        levels: usize,
    },
}

impl MapSpec {
    pub fn golden() -> Self {
        MapSpec::Siegel {
            theta: (5f64.sqrt() - 1.0) / 2.0,
        }
    }

    pub fn build(&self) -> Result<QuadraticMap> {
        Ok(match *self {
            MapSpec::Siegel { theta } => {
                if !theta.is_finite() {
                    return Err(Error::Config(format!("theta {theta} is not finite")));
                }
                QuadraticMap::siegel(theta)
            }
            MapSpec::Centered { c } => QuadraticMap::centered(c),
            MapSpec::Feigenbaum { levels } => {
                QuadraticMap::centered_real(derive_feigenbaum_parameter(levels)?.limit)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategyConfig {
    ExplicitWord { word: BranchWord },
    Random,
    TowardTarget { target: Complex64 },
    OutsideKNearestBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayConfig {
    pub base: Complex64,
    pub angle: f64,
    pub r_max: f64,
    /// Second angle for the branch-separation experiment.
    pub second_angle: Option<f64>,
    /// Marker for nearest-to-marker branch selection.
    pub marker: Option<Complex64>,
}

/// Every preset reads the fields it needs and ignores the rest; unknown
/// fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub map: MapSpec,
    pub window: Option<Window>,
    pub resolution: usize,
    pub max_iter: u32,
    pub escape_radius: f64,
    pub membership: Membership,
    /// Size of the critical-orbit boundary cloud.
    pub cloud: usize,
    /// Number of critical-orbit points `fᵏ(c₀)`, `k = 1..`, used as deepness
    /// centers.
    pub points: usize,
    pub radii: Vec<f64>,
    pub depth: usize,
    pub strategy: StrategyConfig,
    /// Orbit start points; generated from the seed when empty.
    pub starts: Vec<Complex64>,
    pub orbits: usize,
    pub tube_samples: usize,
    pub allowed_prefix: usize,
    pub s: f64,
    pub koebe_tol: f64,
    /// Evaluate the empty-disk witness in leaf reports (needs a raster).
    pub witness: bool,
    pub ray: RayConfig,
    pub epsilon: f64,
    /// Superstable levels for the `feigenbaum` preset.
    pub levels: usize,
    /// NEXR1 raster cache, reused when its grid parameters match.
    pub cache: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let dyadic: Vec<f64> = (0..5).map(|j| 0.2 * 0.5f64.powi(j)).collect();
        let base = ExperimentConfig {
            preset,
            map: MapSpec::golden(),
            window: None,
            resolution: 1024,
            max_iter: 1000,
            escape_radius: 1e3,
            membership: Membership::CenterBounded,
            cloud: 100_000,
            points: 20,
            radii: dyadic,
            depth: 200,
            strategy: StrategyConfig::OutsideKNearestBoundary,
            starts: Vec::new(),
            orbits: 5,
            tube_samples: 128,
            allowed_prefix: 0,
            s: 0.5,
            koebe_tol: 1e-2,
            witness: false,
            ray: RayConfig {
                base: Complex64::new(4.0, 0.0),
                angle: 0.0,
                r_max: 1e3,
                second_angle: None,
                marker: None,
            },
            epsilon: 1e-9,
            levels: 10,
            cache: None,
            seed: 0,
            out: PathBuf::from("out"),
        };
        match preset {
            Preset::Raster | Preset::Leafcheck => base,
            Preset::SiegelDeepness => ExperimentConfig {
                window: Some(Window {
                    re_min: -0.61,
                    re_max: 0.63,
                    im_min: -0.56,
                    im_max: 0.68,
                }),
                resolution: 4096,
                ..base
            },
            Preset::FeigenbaumDeepness => ExperimentConfig {
                map: MapSpec::Feigenbaum { levels: 10 },
                window: Some(Window {
                    re_min: -1.9,
                    re_max: 1.9,
                    im_min: -1.9,
                    im_max: 1.9,
                }),
                resolution: 4096,
                membership: Membership::DistanceEstimate { cells: 0.5 },
                points: 40,
                ..base
            },
            Preset::Rays => ExperimentConfig {
                map: MapSpec::Centered {
                    c: Complex64::new(0.0, 0.0),
                },
                depth: 3,
                ..base
            },
            Preset::Regularity => ExperimentConfig {
                depth: 50,
                radii: vec![0.2, 0.1, 0.05],
                strategy: StrategyConfig::Random,
                ..base
            },
            Preset::Feigenbaum => base,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Range checks shared by all presets.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.resolution < 2 || self.resolution > 32_768 {
            return bad(format!("resolution {} outside 2..=32768", self.resolution));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        if !(self.escape_radius >= 3.0) {
            return bad(format!("escape radius {} below 3", self.escape_radius));
        }
        if self.cloud == 0 {
            return bad("cloud size must be positive".into());
        }
        if self.radii.iter().any(|r| !(*r > 0.0)) || self.radii.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("radii must be positive and strictly decreasing".into());
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return bad(format!("s = {} outside (0, 1)", self.s));
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        if let Some(w) = self.window {
            w.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let StrategyConfig::ExplicitWord { word } = &self.strategy {
            if word.len() < self.depth {
                return bad(format!(
                    "word of length {} shorter than depth {}",
                    word.len(),
                    self.depth
                ));
            }
        }
        Ok(())
    }

    fn window_for(&self, f: &QuadraticMap) -> Window {
        self.window.unwrap_or(if f.is_siegel() {
            Window {
                re_min: -1.13,
                re_max: 1.87,
                im_min: -1.165,
                im_max: 1.835,
            }
        } else {
            Window {
                re_min: -2.0,
                re_max: 2.0,
                im_min: -2.0,
                im_max: 2.0,
            }
        })
    }
}

/// Write a raster to `dir/raster.nexr` and read it back.
pub fn cache_roundtrip(raster: &KRaster, dir: &Path) -> Result<KRaster> {
    let path = dir.join("raster.nexr");
    write_nexr_file(raster, &path)?;
    read_nexr_file(&path)
}

/// Outcome of [`run_experiment`]: files written plus a one-line verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub dir: PathBuf,
    pub files: Vec<String>,
    pub summary: String,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
    timing: Vec<(String, f64)>,
    clock: Instant,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            timing: Vec::new(),
            clock: Instant::now(),
        })
    }

    fn lap(&mut self, stage: &str) {
        self.timing
            .push((stage.into(), self.clock.elapsed().as_secs_f64()));
        self.clock = Instant::now();
    }

    fn create(&mut self, name: &str) -> Result<std::io::BufWriter<fs::File>> {
        self.files.push(name.into());
        Ok(std::io::BufWriter::new(fs::File::create(
            self.dir.join(name),
        )?))
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut out = self.create(name)?;
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    fn finish(mut self, summary: String) -> Result<Bundle> {
        let timing: serde_json::Map<String, Value> = self
            .timing
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let path = self.dir.join("timing.json");
        fs::write(
            path,
            serde_json::to_string_pretty(&Value::Object(timing))? + "\n",
        )?;
        self.files.push("timing.json".into());
        Ok(Bundle {
            dir: self.dir,
            files: self.files,
            summary,
        })
    }
}

fn header(
    cfg: &ExperimentConfig,
    schema: &str,
    f: &QuadraticMap,
) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("schema".into(), json!(schema));
    m.insert("version".into(), json!(VERSION));
    m.insert("seed".into(), json!(cfg.seed));
    m.insert("map".into(), json!(f.form()));
    m.insert(
        "config".into(),
        serde_json::to_value(cfg).expect("config serializes"),
    );
    m
}

/// Run a preset and write its bundle into `cfg.out`.
///
/// On failure a `failure.json` marker is written next to any partial output
/// and the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<Bundle> {
    cfg.validate()?;
    let mut w = Writer::new(&cfg.out)?;
    let config_json = cfg.to_json() + "\n";
    fs::write(cfg.out.join("config.json"), &config_json)?;
    w.files.push("config.json".into());
    let result = match cfg.preset {
        Preset::Raster => run_raster(cfg, exec, &mut w),
        Preset::SiegelDeepness | Preset::FeigenbaumDeepness => run_deepness(cfg, exec, &mut w),
        Preset::Leafcheck => run_leafcheck(cfg, exec, &mut w),
        Preset::Rays => run_rays(cfg, exec, &mut w),
        Preset::Regularity => run_regularity(cfg, exec, &mut w),
        Preset::Feigenbaum => run_feigenbaum(cfg, &mut w),
    };
    match result {
        Ok(summary) => w.finish(summary),
        Err(e) => {
            let marker = json!({
                "failed": true,
                "error": e.to_string(),
                "exit_code": e.exit_code(),
                "written": w.files,
            });
            fs::write(
                cfg.out.join("failure.json"),
                serde_json::to_string_pretty(&marker)? + "\n",
            )?;
            Err(e)
        }
    }
}

fn build_raster(
    cfg: &ExperimentConfig,
    f: &QuadraticMap,
    window: Window,
    exec: Exec,
) -> Result<KRaster> {
    if let Some(path) = &cfg.cache {
        if path.exists() {
            let r = read_nexr_file(path)?;
            let g = r.grid();
            if g.window == window
                && g.width == cfg.resolution
                && g.height == cfg.resolution
                && r.max_iter() == cfg.max_iter
                && r.escape_radius() == cfg.escape_radius
            {
                return Ok(r);
            }
        }
    }
    let r = fill_raster_with(
        f,
        window,
        cfg.resolution,
        cfg.resolution,
        cfg.max_iter,
        cfg.escape_radius,
        cfg.membership,
        exec,
    )?;
    if let Some(path) = &cfg.cache {
        write_nexr_file(&r, path)?;
    }
    Ok(r)
}

fn pgm(
    w: &mut Writer,
    name: &str,
    raster: &KRaster,
    cfg: &ExperimentConfig,
    elapsed: f64,
) -> Result<()> {
    let comment = format!(
        "nexlab {VERSION} preset {:?} seed {}\nmembership {:?}\nelapsed {elapsed:.3} s",
        cfg.preset, cfg.seed, cfg.membership
    );
    let mut out = w.create(name)?;
    write_pgm(raster, &mut out, Some(&comment))?;
    out.flush()?;
    Ok(())
}

fn run_raster(cfg: &ExperimentConfig, exec: Exec, w: &mut Writer) -> Result<String> {
    let f = cfg.map.build()?;
    let raster = build_raster(cfg, &f, cfg.window_for(&f), exec)?;
    w.lap("raster");
    let elapsed = w.timing.last().map_or(0.0, |t| t.1);
    w.files.push("raster.nexr".into());
    write_nexr_file(&raster, &w.dir.join("raster.nexr"))?;
    pgm(w, "raster.pgm", &raster, cfg, elapsed)?;
    let mut doc = header(cfg, RASTER_SCHEMA, &f);
    doc.insert("inside_fraction".into(), json!(raster.inside_fraction()));
    doc.insert("inside_count".into(), json!(raster.inside_count()));
    w.json("raster.json", &Value::Object(doc))?;
    Ok(format!(
        "raster {}x{}: inside fraction {:.6}",
        raster.width(),
        raster.height(),
        raster.inside_fraction()
    ))
}

/// Deepness profiles at the first `cfg.points` critical-orbit points.
pub fn deepness_profiles(
    f: &QuadraticMap,
    count: usize,
    radii: &[f64],
    raster: &KRaster,
    field: &DistanceField,
    exec: Exec,
) -> Result<Vec<DeepnessProfile>> {
    let mut centers = Vec::with_capacity(count);
    let mut z = f.critical_point();
    for _ in 0..count {
        z = f.apply(z);
        centers.push(z);
    }
    exec.map_range(centers.len(), |k| {
        deepness_profile(centers[k], radii, raster, field)
    })
    .into_iter()
    .collect()
}

fn run_deepness(cfg: &ExperimentConfig, exec: Exec, w: &mut Writer) -> Result<String> {
    let f = cfg.map.build()?;
    let raster = build_raster(cfg, &f, cfg.window_for(&f), exec)?;
    w.lap("raster");
    let field = distance_transform(&raster, exec);
    w.lap("distance_transform");
    let profiles = deepness_profiles(&f, cfg.points, &cfg.radii, &raster, &field, exec)?;
    w.lap("profiles");

    let mut csv = w.create("profiles.csv")?;
    writeln!(csv, "{PROFILE_COLUMNS}")?;
    for (k, p) in profiles.iter().enumerate() {
        for j in 0..p.radii.len() {
            writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                k + 1,
                p.center.re,
                p.center.im,
                p.radii[j],
                p.delta_over_r[j],
                p.density[j],
                p.clipped
            )?;
        }
    }
    csv.flush()?;
    drop(csv);

    let fit = fit_power_law(&profiles);
    let dens_ok = profiles
        .iter()
        .filter(|p| p.density_nondecreasing())
        .count();
    let delta_ok = profiles
        .iter()
        .filter(|p| p.delta_ratio_nonincreasing())
        .count();
    let mut doc = header(cfg, DEEPNESS_SCHEMA, &f);
    doc.insert("points".into(), json!(profiles.len()));
    doc.insert("density_nondecreasing".into(), json!(dens_ok));
    doc.insert("delta_ratio_nonincreasing".into(), json!(delta_ok));
    doc.insert(
        "fit".into(),
        match &fit {
            Ok(fit) => serde_json::to_value(fit)?,
            Err(e) => json!({ "error": e.to_string() }),
        },
    );
    doc.insert("profiles".into(), serde_json::to_value(&profiles)?);
    w.json("deepness.json", &Value::Object(doc))?;
    let elapsed: f64 = w.timing.iter().map(|t| t.1).sum();
    pgm(w, "raster.pgm", &raster, cfg, elapsed)?;
    let alpha = fit.as_ref().map_or(f64::NAN, |f| f.alpha);
    Ok(format!(
        "{} points: density nondecreasing {dens_ok}, delta/r nonincreasing {delta_ok}, alpha {alpha:.4}",
        profiles.len()
    ))
}

fn start_points(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng, f: &QuadraticMap) -> Vec<Complex64> {
    if !cfg.starts.is_empty() {
        return cfg.starts.clone();
    }
    let center = if f.is_siegel() {
        Complex64::new(0.37, 0.335)
    } else {
        Complex64::new(0.0, 0.0)
    };
    (0..cfg.orbits)
        .map(|_| center + Complex64::from_polar(2.5, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect()
}

fn run_leafcheck(cfg: &ExperimentConfig, exec: Exec, w: &mut Writer) -> Result<String> {
    let f = cfg.map.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cloud = postcritical_cloud(&f, cfg.cloud)?;
    let escape = EscapeTest {
        max_iter: cfg.max_iter,
        escape_radius: cfg.escape_radius,
    };
    let field = if cfg.witness {
        let raster = build_raster(cfg, &f, cfg.window_for(&f), exec)?;
        Some(distance_transform(&raster, exec))
    } else {
        None
    };
    w.lap("setup");
    let params = LeafParams {
        s: cfg.s,
        samples: cfg.tube_samples,
        koebe_tol: cfg.koebe_tol,
    };
    let mut summary = Vec::new();
    for (k, z0) in start_points(cfg, &mut rng, &f).into_iter().enumerate() {
        let seed: u64 = rng.gen();
        let strategy = match &cfg.strategy {
            StrategyConfig::ExplicitWord { word } => Strategy::Word(word),
            StrategyConfig::Random => Strategy::Random { seed },
            StrategyConfig::TowardTarget { target } => Strategy::TowardTarget(*target),
            StrategyConfig::OutsideKNearestBoundary => Strategy::OutsideKNearestBoundary {
                boundary: &cloud,
                escape,
            },
        };
        let orbit = extend_backward(&f, z0, strategy, cfg.depth)?;
        let escaped = orbit
            .points()
            .iter()
            .filter(|z| escape.escapes(&f, **z))
            .count();
        let rep = leaf_type_report(&f, &orbit, &cloud, field.as_ref(), params, exec)?;
        let mut doc = serde_json::to_value(&rep)?;
        doc["run"] = Value::Object(header(cfg, LEAFCHECK_SCHEMA, &f));
        w.json(&format!("leaf_{k}.json"), &doc)?;
        let mut csv = w.create(&format!("leaf_{k}.csv"))?;
        rep.write_csv(&mut csv)?;
        csv.flush()?;
        summary.push(json!({
            "z0": z0,
            "escape_verified": escaped,
            "points": orbit.points().len(),
            "max_growth": rep.summary.max_growth,
            "exceeding_10x": rep.exceeding(10.0).len(),
            "koebe_checked": rep.summary.koebe_checked,
            "koebe_violations": rep.summary.koebe_violations,
        }));
    }
    w.lap("reports");
    let mut doc = header(cfg, LEAFCHECK_SCHEMA, &f);
    doc.insert("orbits".into(), Value::Array(summary.clone()));
    w.json("leafcheck.json", &Value::Object(doc))?;
    let grown = summary
        .iter()
        .filter(|s| s["exceeding_10x"].as_u64() > Some(0))
        .count();
    let violations: u64 = summary
        .iter()
        .filter_map(|s| s["koebe_violations"].as_u64())
        .sum();
    Ok(format!(
        "{} orbits: {grown} exceed 10x growth, {violations} Koebe violations",
        summary.len()
    ))
}

fn run_rays(cfg: &ExperimentConfig, exec: Exec, w: &mut Writer) -> Result<String> {
    let f = cfg.map.build()?;
    let rc = cfg.ray;
    let ray = Ray::new(rc.base, rc.angle)?.with_r_max(rc.r_max)?;
    let set = enumerate_lifts(&f, &ray, cfg.depth, cfg.epsilon, exec)?;
    w.lap("lifts");
    let mut doc = header(cfg, RAYS_SCHEMA, &f);
    doc.insert("lifts".into(), serde_json::to_value(&set)?);
    if let Some(angle) = rc.second_angle {
        let other = Ray::new(rc.base, angle)?.with_r_max(rc.r_max)?;
        let selector = BranchSelector::NearestToMarker {
            marker: rc.marker.unwrap_or(Complex64::new(0.0, 1.0)),
        };
        let sep = branch_separation_experiment(
            &f,
            &ray,
            &other,
            cfg.depth,
            cfg.epsilon,
            &selector,
            exec,
        )?;
        doc.insert("separation".into(), serde_json::to_value(&sep)?);
    }
    w.json("lifts.json", &Value::Object(doc))?;
    let elapsed = w.timing.iter().map(|t| t.1).sum::<f64>();
    let mut svg = w.create("lifts.svg")?;
    write_svg(
        &f,
        &set,
        &mut svg,
        &format!("nexlab {VERSION} seed {} elapsed {elapsed:.3} s", cfg.seed),
    )?;
    svg.flush()?;
    Ok(format!("{} lifts at depth {}", set.lifts.len(), set.depth))
}

fn run_regularity(cfg: &ExperimentConfig, exec: Exec, w: &mut Writer) -> Result<String> {
    let f = cfg.map.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let z0 = cfg
        .starts
        .first()
        .copied()
        .unwrap_or_else(|| f.beta_fixed_point());
    let seed: u64 = rng.gen();
    let cloud;
    let strategy = match &cfg.strategy {
        StrategyConfig::ExplicitWord { word } => Strategy::Word(word),
        StrategyConfig::Random => Strategy::Random { seed },
        StrategyConfig::TowardTarget { target } => Strategy::TowardTarget(*target),
        StrategyConfig::OutsideKNearestBoundary => {
            cloud = postcritical_cloud(&f, cfg.cloud)?;
            let escape = EscapeTest {
                max_iter: cfg.max_iter,
                escape_radius: cfg.escape_radius,
            };
            Strategy::OutsideKNearestBoundary {
                boundary: &cloud,
                escape,
            }
        }
    };
    let orbit = extend_backward(&f, z0, strategy, cfg.depth)?;
    let rep = regularity_probe(
        &f,
        &orbit,
        &cfg.radii,
        cfg.tube_samples,
        cfg.allowed_prefix,
        exec,
    )?;
    w.lap("probe");
    let mut doc = header(cfg, REGULARITY_SCHEMA, &f);
    doc.insert("z0".into(), json!(z0));
    doc.insert("word".into(), json!(orbit.word().to_bit_string()));
    doc.insert("report".into(), serde_json::to_value(&rep)?);
    w.json("regularity.json", &Value::Object(doc))?;
    Ok(match rep.max_univalent_radius {
        Some(r) => format!(
            "{}: univalent up to radius {r} at depth {}",
            rep.label, rep.orbit_depth
        ),
        None => format!(
            "{}: no tested radius univalent at depth {}",
            rep.label, rep.orbit_depth
        ),
    })
}

fn run_feigenbaum(cfg: &ExperimentConfig, w: &mut Writer) -> Result<String> {
    let p = derive_feigenbaum_parameter(cfg.levels)?;
    w.lap("derive");
    let mut doc = serde_json::Map::new();
    doc.insert("schema".into(), json!(FEIGENBAUM_SCHEMA));
    doc.insert("version".into(), json!(VERSION));
    doc.insert("seed".into(), json!(cfg.seed));
    doc.insert("config".into(), serde_json::to_value(cfg)?);
    doc.insert("parameter".into(), serde_json::to_value(&p)?);
    doc.insert("last_ratio_change".into(), json!(p.last_ratio_change()));
    w.json("feigenbaum.json", &Value::Object(doc))?;
    Ok(format!("c_F = {} from {} levels", p.limit, cfg.levels))
}

/// Human-readable summary of a bundle directory.
pub fn summarize_bundle(dir: &Path) -> Result<String> {
    let cfg = ExperimentConfig::from_json(&fs::read_to_string(dir.join("config.json"))?)?;
    let mut out = format!(
        "preset {:?}, seed {}, map {:?}\n",
        cfg.preset, cfg.seed, cfg.map
    );
    let failure = dir.join("failure.json");
    if failure.exists() {
        let v: Value = serde_json::from_str(&fs::read_to_string(failure)?)?;
        out.push_str(&format!("FAILED: {}\n", v["error"].as_str().unwrap_or("?")));
    }
    let read = |name: &str| -> Result<Option<Value>> {
        let p = dir.join(name);
        if !p.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(p)?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| Error::Format {
                offset: e.column() as u64,
                reason: e.to_string(),
            })
    };
    if let Some(v) = read("deepness.json")? {
        out.push_str(&format!(
            "deepness: {} points, density nondecreasing {}, delta/r nonincreasing {}, fit {}\n",
            v["points"], v["density_nondecreasing"], v["delta_ratio_nonincreasing"], v["fit"]
        ));
    }
    if let Some(v) = read("leafcheck.json")? {
        for (k, o) in v["orbits"].as_array().into_iter().flatten().enumerate() {
            out.push_str(&format!(
                "leaf {k}: max growth {}, exceeding 10x at {} depths, Koebe violations {}/{}\n",
                o["max_growth"], o["exceeding_10x"], o["koebe_violations"], o["koebe_checked"]
            ));
        }
    }
    if let Some(v) = read("lifts.json")? {
        out.push_str(&format!(
            "rays: {} lifts at depth {}\n",
            v["lifts"]["lifts"].as_array().map_or(0, Vec::len),
            v["lifts"]["depth"]
        ));
        if v.get("separation").is_some() {
            out.push_str(&format!("separation: {}\n", v["separation"]));
        }
    }
    if let Some(v) = read("regularity.json")? {
        out.push_str(&format!(
            "regularity ({}): max univalent radius {}\n",
            v["report"]["label"].as_str().unwrap_or(""),
            v["report"]["max_univalent_radius"]
        ));
    }
    if let Some(v) = read("feigenbaum.json")? {
        out.push_str(&format!("feigenbaum: c_F = {}\n", v["parameter"]["limit"]));
    }
    if let Some(v) = read("raster.json")? {
        out.push_str(&format!(
            "raster: inside fraction {}\n",
            v["inside_fraction"]
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_roundtrip() {
        for p in [
            Preset::Raster,
            Preset::SiegelDeepness,
            Preset::FeigenbaumDeepness,
            Preset::Leafcheck,
            Preset::Rays,
            Preset::Regularity,
            Preset::Feigenbaum,
        ] {
            let cfg = ExperimentConfig::preset(p);
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
    }

    #[test]
    fn unknown_fields_and_bad_ranges_are_config_errors() {
        let mut v = serde_json::to_value(ExperimentConfig::preset(Preset::Rays)).unwrap();
        v["bogus"] = json!(1);
        let e = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let cfg = ExperimentConfig {
            radii: vec![0.1, 0.2],
            ..ExperimentConfig::preset(Preset::Rays)
        };
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn leafcheck_depth_zero_has_one_identity_record() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            depth: 0,
            orbits: 1,
            cloud: 1000,
            out: dir.path().to_path_buf(),
            ..ExperimentConfig::preset(Preset::Leafcheck)
        };
        run_experiment(&cfg, Exec::default()).unwrap();
        let v: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("leaf_0.json")).unwrap())
                .unwrap();
        assert_eq!(v["d"], json!([1.0]));
        assert_eq!(v["product"][0], v["r"][0]);
        assert_eq!(v["product"][0], v["metadata"]["r0"]);
    }

    #[test]
    fn rays_preset_writes_eight_lifts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            out: dir.path().to_path_buf(),
            ..ExperimentConfig::preset(Preset::Rays)
        };
        let b = run_experiment(&cfg, Exec::default()).unwrap();
        assert!(b.files.contains(&"lifts.svg".to_string()));
        let svg = fs::read_to_string(dir.path().join("lifts.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 8);
        assert!(summarize_bundle(dir.path()).unwrap().contains("8 lifts"));
    }

    #[test]
    fn failure_marker_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            ray: RayConfig {
                base: Complex64::new(1.0, 0.0),
                angle: std::f64::consts::PI,
                ..ExperimentConfig::preset(Preset::Rays).ray
            },
            map: MapSpec::Centered {
                c: Complex64::new(-1.0, 0.0),
            },
            out: dir.path().to_path_buf(),
            ..ExperimentConfig::preset(Preset::Rays)
        };
        let e = run_experiment(&cfg, Exec::default()).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(dir.path().join("failure.json").exists());
        assert!(summarize_bundle(dir.path()).unwrap().contains("FAILED"));
    }

    #[test]
    fn cache_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let f = QuadraticMap::centered_real(0.0);
        let w = Window::centered(Complex64::new(0.0, 0.0), 1.5).unwrap();
        let r = crate::raster::fill_raster(&f, w, 64, 64, 100, 1e3, Exec::default()).unwrap();
        assert_eq!(cache_roundtrip(&r, dir.path()).unwrap(), r);
        let empty = KRaster::from_predicate(*r.grid(), |_| false);
        assert_eq!(cache_roundtrip(&empty, dir.path()).unwrap(), empty);
    }
}
