//! `palmsim`: generate ensembles, apply the Palm transforms, run the tests.
//!
//! Exit status is 0 when every selected test passes, 1 when a test rejects
//! or a run fails, and 2 on configuration errors.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use palm_core::generators::{ControlKind, GeneratorKind};

use config::{ConfigError, ExperimentConfig, ShiftKind};

#[derive(Parser, Debug)]
#[command(name = "palmsim", version, about = "Palm versions of random measures: simulation and tests")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override the config file.
#[derive(Args, Debug, Default, Clone)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n_samples: Option<usize>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Torus side W.
    #[arg(long, global = true)]
    window: Option<u32>,
    /// Grid cells per unit length.
    #[arg(long, global = true)]
    grid: Option<u32>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    level: Option<f64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    kind: Option<KindArg>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    intensity: Option<f64>,
    #[arg(long, global = true, value_enum)]
    control: Option<ControlArg>,
    /// Read the ensemble from a file written by `generate`, `palm` or `invert`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum KindArg {
    Poisson,
    PalmPoisson,
    MixedPoisson,
    ShotNoise,
    Binomial,
    Control,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ControlArg {
    ExtraAtom,
    Ramp,
}

#[derive(Copy, Clone, Debug, Default, ValueEnum)]
enum Method {
    /// Lattice construction; works for any measure.
    #[default]
    Lattice,
    /// Density reweighting; needs a strictly positive density.
    Density,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Line,
    Example1,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw an ensemble and write it with its summary.
    Generate,
    /// Stationary ensemble to its Palm version.
    Palm {
        #[arg(long, value_enum, default_value_t)]
        method: Method,
    },
    /// Palm ensemble back to the stationary version.
    Invert {
        #[arg(long, value_enum, default_value_t)]
        method: Method,
    },
    /// Test mass-stationarity on boxes `[0, n)^d`.
    TestMassStat {
        /// Box sides, comma separated.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<u32>>,
    },
    /// Test invariance under preserving shifts.
    ShiftInvariance {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Pass to the product with Lebesgue measure first.
        #[arg(long)]
        extend: bool,
        /// Shift parameters, comma separated.
        #[arg(long, value_delimiter = ',')]
        r: Option<Vec<f64>>,
    },
    /// Forward then inverse; compare with the input ensemble.
    Roundtrip,
    /// Deterministic property suite; no sampling.
    Selftest,
}

fn apply_overrides(cfg: &mut ExperimentConfig, c: &Common) {
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.n_samples {
        cfg.n_samples = v;
    }
    if let Some(v) = c.dim {
        cfg.generator.dim = v;
    }
    if let Some(v) = c.window {
        cfg.generator.window = v;
    }
    if let Some(v) = c.grid {
        cfg.generator.grid = v;
    }
    if let Some(v) = c.level {
        cfg.test.level = v;
    }
    if let Some(v) = c.threads {
        cfg.threads = v;
    }
    if let Some(v) = &c.out {
        cfg.out = v.clone();
    }
    if let Some(v) = c.intensity {
        cfg.generator.intensity = v;
    }
    if let Some(v) = &c.input {
        cfg.input = Some(v.clone());
    }
    if let Some(k) = c.kind {
        cfg.generator.kind = match k {
            KindArg::Poisson => GeneratorKind::Poisson,
            KindArg::PalmPoisson => GeneratorKind::PalmPoisson,
            KindArg::MixedPoisson => GeneratorKind::MixedPoisson,
            KindArg::ShotNoise => GeneratorKind::ShotNoiseDensity,
            KindArg::Binomial => GeneratorKind::Binomial,
            KindArg::Control => GeneratorKind::NegativeControl,
        };
    }
    if let Some(k) = c.control {
        cfg.generator.control = match k {
            ControlArg::ExtraAtom => ControlKind::ExtraAtom,
            ControlArg::Ramp => ControlKind::Ramp,
        };
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    apply_overrides(&mut cfg, &cli.common);
    match &cli.command {
        Command::TestMassStat { n_list: Some(n) } => cfg.test.n_list = n.clone(),
        Command::ShiftInvariance { mode, extend, r } => {
            if let Some(m) = mode {
                cfg.shift.mode = match m {
                    ModeArg::Line => ShiftKind::Line,
                    ModeArg::Example1 => ShiftKind::Example1,
                };
            }
            cfg.shift.extend |= *extend;
            if let Some(r) = r {
                cfg.shift.r = r.clone();
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if matches!(cli.command, Command::Selftest) {
        // no sampling, so no configuration beyond the output directory
        let out = cli.common.out.clone();
        return run::selftest(out.as_deref());
    }
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if cfg.threads > 0 {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    let name = match &cli.command {
        Command::Generate => "generate",
        Command::Palm { .. } => "palm",
        Command::Invert { .. } => "invert",
        Command::TestMassStat { .. } => "test-mass-stat",
        Command::ShiftInvariance { .. } => "shift-invariance",
        Command::Roundtrip => "roundtrip",
        Command::Selftest => unreachable!(),
    };
    let result = match cli.command {
        Command::Generate => run::transform(&cfg, name, None),
        Command::Palm { method } => run::transform(&cfg, name, Some(run::Step::palm(matches!(method, Method::Density)))),
        Command::Invert { method } => {
            run::transform(&cfg, name, Some(run::Step::inverse(matches!(method, Method::Density))))
        }
        Command::TestMassStat { .. } => run::mass_stat(&cfg, name),
        Command::ShiftInvariance { .. } => run::shift_invariance(&cfg, name),
        Command::Roundtrip => run::roundtrip(&cfg, name),
        Command::Selftest => unreachable!(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            if let Some(c) = e.downcast_ref::<ConfigError>() {
                eprintln!("config error: {c}");
                return ExitCode::from(2);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
