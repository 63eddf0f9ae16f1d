use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nexlab::experiment::{run_experiment, summarize_bundle, ExperimentConfig, MapSpec, Preset};
use nexlab::{Error, Exec, Result};
use num_complex::Complex64;

#[derive(Parser)]
#[command(
    name = "nexlab",
    version,
    about = "Numerical experiments on quadratic Julia sets and their natural extensions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize the filled Julia set and write NEXR1 and PGM files.
    Raster(Common),
    /// Density and empty-disk profiles at critical-orbit points.
    Deepness {
        #[command(flatten)]
        common: Common,
        /// Use the Feigenbaum preset instead of the golden Siegel one.
        #[arg(long)]
        feigenbaum: bool,
    },
    /// Leaf-type reports along backward orbits outside K.
    Leafcheck(Common),
    /// Enumerate the lifts of a ray.
    Rays {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        angle: Option<f64>,
        /// Second angle for the branch-separation experiment.
        #[arg(long)]
        second_angle: Option<f64>,
    },
    /// Pullback univalence over a radius schedule (truncated evidence).
    Regularity(Common),
    /// Derive the Feigenbaum parameter from the period-doubling cascade.
    Feigenbaum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Summarize an existing bundle directory.
    Report { dir: PathBuf },
}

#[derive(Args)]
struct Common {
    /// JSON config; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rotation number of a Siegel-form map.
    #[arg(long, conflicts_with_all = ["c_re", "c_im"])]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c_im: Option<f64>,
    #[arg(long)]
    res: Option<usize>,
    #[arg(long)]
    max_iter: Option<u32>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    depth: Option<usize>,
    /// Boundary cloud size.
    #[arg(long)]
    cloud: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run single-threaded.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn config(&self, preset: Preset) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let mut cfg = ExperimentConfig::from_json(&text)?;
                if cfg.preset != preset {
                    return Err(Error::Config(format!(
                        "config preset {:?} does not match the subcommand",
                        cfg.preset
                    )));
                }
                cfg.preset = preset;
                cfg
            }
            None => ExperimentConfig::preset(preset),
        };
        if let Some(theta) = self.theta {
            cfg.map = MapSpec::Siegel { theta };
        }
        if self.c_re.is_some() || self.c_im.is_some() {
            cfg.map = MapSpec::Centered {
                c: Complex64::new(self.c_re.unwrap_or(0.0), self.c_im.unwrap_or(0.0)),
            };
        }
        if let Some(v) = self.res {
            cfg.resolution = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = &self.radii {
            cfg.radii = v.clone();
        }
        if let Some(v) = self.depth {
            cfg.depth = v;
        }
        if let Some(v) = self.cloud {
            cfg.cloud = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        Ok(cfg)
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }
}

fn run_preset(
    common: &Common,
    preset: Preset,
    tweak: impl FnOnce(&mut ExperimentConfig),
) -> Result<()> {
    let mut cfg = common.config(preset)?;
    tweak(&mut cfg);
    let bundle = run_experiment(&cfg, common.exec())?;
    println!("{}", bundle.summary);
    for f in &bundle.files {
        println!("wrote {}", bundle.dir.join(f).display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Raster(c) => run_preset(&c, Preset::Raster, |_| {}),
        Command::Deepness { common, feigenbaum } => {
            let preset = if feigenbaum {
                Preset::FeigenbaumDeepness
            } else {
                Preset::SiegelDeepness
            };
            run_preset(&common, preset, |_| {})
        }
        Command::Leafcheck(c) => run_preset(&c, Preset::Leafcheck, |_| {}),
        Command::Rays {
            common,
            angle,
            second_angle,
        } => run_preset(&common, Preset::Rays, |cfg| {
            if let Some(a) = angle {
                cfg.ray.angle = a;
            }
            if second_angle.is_some() {
                cfg.ray.second_angle = second_angle;
            }
        }),
        Command::Regularity(c) => run_preset(&c, Preset::Regularity, |_| {}),
        Command::Feigenbaum { common, levels } => run_preset(&common, Preset::Feigenbaum, |cfg| {
            if let Some(l) = levels {
                cfg.levels = l;
            }
        }),
        Command::Report { dir } => {
            print!("{}", summarize_bundle(&dir)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
