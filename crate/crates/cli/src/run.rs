//! Subcommand pipelines and their artifacts.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use palm_core::generators::generate_ensemble;
use palm_core::io::{read_ensemble, write_ensemble};
use palm_core::palm::{density_inverse, density_palm, palm_forward_rooted, palm_inverse_rooted};
use palm_core::preserving::RootedSample;
use palm_core::rng::{derive_seed, stream};
use palm_core::selftest as suite;
use palm_core::stats::{
    mass_stationarity_report, roundtrip_report, shift_invariance_report, FunctionalSet, TestConfig, TestReport, View,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig, Transform};

/// Seed tags, so that each stage draws from its own streams.
const TAG_ROOT: u64 = 1;
const TAG_STEP: u64 = 100;

#[derive(Clone, Copy, Debug)]
pub struct Step(Transform);

impl Step {
    pub fn palm(density: bool) -> Self {
        Step(if density { Transform::DensityPalm } else { Transform::PalmForward })
    }

    pub fn inverse(density: bool) -> Self {
        Step(if density { Transform::DensityInverse } else { Transform::PalmInverse })
    }
}

fn apply(ensemble: Vec<RootedSample>, t: Transform, seed: u64) -> Result<Vec<RootedSample>> {
    let out: palm_core::Result<Vec<RootedSample>> = ensemble
        .into_par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut rng = stream(seed, i as u64);
            Ok(match t {
                Transform::PalmForward => palm_forward_rooted(&r, &mut rng)?.rooted(),
                Transform::PalmInverse => palm_inverse_rooted(&r, &mut rng)?.rooted(),
                Transform::DensityPalm => RootedSample {
                    sample: density_palm(&r.sample)?,
                    root: r.root,
                },
                Transform::DensityInverse => RootedSample {
                    sample: density_inverse(&r.sample)?,
                    root: r.root,
                },
                Transform::ProductExtend => {
                    let sample = r.sample.product_extended();
                    let h = 1.0 / sample.measure.res() as f64;
                    let mut root = r.root;
                    root.push(rng.random::<f64>() * h);
                    RootedSample { sample, root }
                }
            })
        })
        .collect();
    out.with_context(|| format!("applying {t:?}"))
}

/// Input ensemble after the configured transform chain.
fn ensemble(cfg: &ExperimentConfig) -> Result<Vec<RootedSample>> {
    let mut ens = match &cfg.input {
        Some(path) => {
            let f = File::open(path).map_err(|e| ConfigError::new("input", format!("{}: {e}", path.display())))?;
            read_ensemble(BufReader::new(f)).map_err(|e| ConfigError::new("input", e.to_string()))?
        }
        None => {
            let seed = derive_seed(cfg.seed, TAG_ROOT);
            generate_ensemble(&cfg.generator_spec(), cfg.n_samples, cfg.seed)?
                .into_iter()
                .enumerate()
                .map(|(i, s)| RootedSample::jittered(s, &mut stream(seed, i as u64)))
                .collect()
        }
    };
    if ens.len() < 2 {
        return Err(ConfigError::new("input", "needs at least 2 samples").into());
    }
    for (k, t) in cfg.transforms.iter().enumerate() {
        ens = apply(ens, *t, derive_seed(cfg.seed, TAG_STEP + k as u64))?;
    }
    Ok(ens)
}

fn test_config(cfg: &ExperimentConfig) -> TestConfig {
    TestConfig {
        level: cfg.test.level,
        n_perm: cfg.test.n_perm,
        seed: cfg.seed,
        joint_cap: cfg.test.joint_cap,
        bins: cfg.test.bins,
    }
}

/// One row per sample: weight, atom count, total mass, root, functionals.
fn write_summary(path: &Path, ens: &[RootedSample]) -> Result<()> {
    let fset = FunctionalSet::standard();
    let dim = ens.first().map_or(0, |r| r.root.len());
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["index".to_string(), "weight".into(), "atom_count".into(), "total_mass".into()];
    header.extend((0..dim).map(|k| format!("root_{k}")));
    header.extend(fset.names());
    w.write_record(&header)?;
    let rows: Vec<Vec<String>> = ens
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let m = &r.sample.measure;
            let mut row = vec![
                i.to_string(),
                r.sample.weight().to_string(),
                m.atoms().len().to_string(),
                m.total_mass().to_string(),
            ];
            row.extend(r.root.iter().map(f64::to_string));
            row.extend(fset.eval(&View::new(r)).iter().map(f64::to_string));
            row
        })
        .collect();
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    threads: usize,
    /// File holding the resolved configuration; `palmsim <command> --config <it>` re-runs.
    config_file: &'a str,
    config: &'a ExperimentConfig,
    outputs: Vec<String>,
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))
    }

    fn finish(mut self, cfg: &ExperimentConfig, command: &str) -> Result<()> {
        self.text("config.toml", &cfg.to_toml())?;
        let manifest = Manifest {
            tool: "palmsim",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed,
            threads: cfg.threads,
            config_file: "config.toml",
            config: cfg,
            outputs: self.written.clone(),
        };
        let p = self.dir.join("manifest.json");
        fs::write(&p, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(())
    }
}

fn write_report(art: &mut Artifacts, rep: &TestReport) -> Result<()> {
    #[derive(Serialize)]
    struct Out<'a> {
        report: &'a TestReport,
        records: Vec<palm_core::stats::TestRecord>,
    }
    let body = serde_json::to_string_pretty(&Out {
        report: rep,
        records: rep.records(),
    })?;
    art.text("report.json", &(body + "\n"))?;
    art.text("report.txt", &rep.to_key_value())?;
    println!("{}: {} ({})", rep.test, rep.verdict.as_str(), rep.summary);
    println!("min adjusted p-value {:.4}", rep.min_adjusted_p());
    Ok(())
}

/// `generate`, `palm` and `invert`.
pub fn transform(cfg: &ExperimentConfig, command: &str, step: Option<Step>) -> Result<bool> {
    let mut ens = ensemble(cfg)?;
    if let Some(Step(t)) = step {
        ens = apply(ens, t, derive_seed(cfg.seed, TAG_STEP + 50))?;
    }
    let mut art = Artifacts::new(&cfg.out)?;
    let p = art.path("ensemble.txt");
    let mut w = BufWriter::new(File::create(&p)?);
    write_ensemble(&mut w, &ens)?;
    w.flush()?;
    let p = art.path("summary.csv");
    write_summary(&p, &ens)?;
    art.finish(cfg, command)?;
    println!("{command}: wrote {} samples to {}", ens.len(), cfg.out.display());
    Ok(true)
}

fn samples(ens: &[RootedSample]) -> Vec<palm_core::measure::WeightedSample> {
    ens.iter().map(|r| r.sample.clone()).collect()
}

pub fn mass_stat(cfg: &ExperimentConfig, command: &str) -> Result<bool> {
    let ens = ensemble(cfg)?;
    let rep = mass_stationarity_report(&samples(&ens), &cfg.test.n_list, &FunctionalSet::standard(), &test_config(cfg))?;
    finish_test(cfg, command, &ens, &rep)
}

pub fn shift_invariance(cfg: &ExperimentConfig, command: &str) -> Result<bool> {
    let ens = ensemble(cfg)?;
    let dim = ens[0].root.len();
    let rep = shift_invariance_report(&samples(&ens), &cfg.shift_mode(dim), &cfg.shift.r, &test_config(cfg))?;
    finish_test(cfg, command, &ens, &rep)
}

pub fn roundtrip(cfg: &ExperimentConfig, command: &str) -> Result<bool> {
    let ens = ensemble(cfg)?;
    let rep = roundtrip_report(&samples(&ens), &FunctionalSet::standard(), &test_config(cfg))?;
    finish_test(cfg, command, &ens, &rep)
}

fn finish_test(cfg: &ExperimentConfig, command: &str, ens: &[RootedSample], rep: &TestReport) -> Result<bool> {
    let mut art = Artifacts::new(&cfg.out)?;
    let p = art.path("summary.csv");
    write_summary(&p, ens)?;
    write_report(&mut art, rep)?;
    art.finish(cfg, command)?;
    Ok(rep.passed())
}

pub fn selftest(out: Option<&Path>) -> ExitCode {
    let rep = suite::run();
    print!("{}", rep.to_key_value());
    if let Some(dir) = out {
        let written = fs::create_dir_all(dir)
            .and_then(|_| fs::write(dir.join("selftest.txt"), rep.to_key_value()))
            .and_then(|_| {
                let json = serde_json::to_string_pretty(&rep).map_err(std::io::Error::other)?;
                fs::write(dir.join("selftest.json"), json + "\n")
            });
        if let Err(e) = written {
            eprintln!("error: writing selftest report: {e}");
            return ExitCode::from(1);
        }
    }
    if rep.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
