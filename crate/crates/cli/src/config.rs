//! Experiment configuration: a TOML file, overridden by flags.

use std::fmt;
use std::path::{Path, PathBuf};

use palm_core::generators::{ControlKind, GeneratorKind, GeneratorSpec};
use palm_core::stats::ShiftMode;
use serde::{Deserialize, Serialize};

/// A configuration problem, tied to the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

impl ConfigError {
    pub fn new(field: &str, msg: impl Into<String>) -> Self {
        ConfigError {
            field: field.to_string(),
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.msg)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    PalmForward,
    PalmInverse,
    DensityPalm,
    DensityInverse,
    ProductExtend,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSection {
    pub level: f64,
    pub n_perm: usize,
    pub n_list: Vec<u32>,
    pub joint_cap: usize,
    pub bins: usize,
}

impl Default for TestSection {
    fn default() -> Self {
        TestSection {
            level: 0.05,
            n_perm: 999,
            n_list: vec![1, 2],
            joint_cap: 1000,
            bins: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    Line,
    Example1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSection {
    pub mode: ShiftKind,
    pub r: Vec<f64>,
    /// Line direction; defaults to the first axis.
    pub direction: Option<Vec<f64>>,
    pub laps: u32,
    /// Background box side for the tile rotation.
    pub n: u32,
    pub extend: bool,
    pub subdivide: u32,
    pub bits: u32,
}

impl Default for ShiftSection {
    fn default() -> Self {
        ShiftSection {
            mode: ShiftKind::Line,
            r: vec![0.5, 1.0, 2.0],
            direction: None,
            laps: 4,
            n: 1,
            extend: false,
            subdivide: 0,
            bits: 48,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub kind: GeneratorKind,
    pub intensity: f64,
    pub dim: usize,
    pub window: u32,
    pub grid: u32,
    pub base_level: f64,
    pub count: usize,
    pub control: ControlKind,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        GeneratorSection {
            kind: GeneratorKind::PalmPoisson,
            intensity: 1.0,
            dim: 1,
            window: 8,
            grid: 1,
            base_level: 0.5,
            count: 0,
            control: ControlKind::ExtraAtom,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Worker threads; zero uses every core.
    pub threads: usize,
    pub out: PathBuf,
    /// Read the ensemble from this file instead of generating it.
    pub input: Option<PathBuf>,
    pub generator: GeneratorSection,
    pub transforms: Vec<Transform>,
    pub test: TestSection,
    pub shift: ShiftSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            n_samples: 1000,
            threads: 0,
            out: PathBuf::from("palmsim-out"),
            input: None,
            generator: GeneratorSection::default(),
            transforms: Vec::new(),
            test: TestSection::default(),
            shift: ShiftSection::default(),
        }
    }
}

/// Field path from a TOML error message such as "unknown field `x`".
fn toml_field(err: &toml::de::Error) -> String {
    let msg = err.message();
    msg.split('`').nth(1).unwrap_or("config").to_string()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        #[derive(Deserialize, Default)]
        #[serde(default, deny_unknown_fields)]
        struct Raw {
            seed: Option<u64>,
            n_samples: Option<usize>,
            threads: Option<usize>,
            out: Option<PathBuf>,
            input: Option<PathBuf>,
            generator: Option<toml::Table>,
            transforms: Option<Vec<Transform>>,
            test: Option<toml::Table>,
            shift: Option<toml::Table>,
        }
        let raw: Raw = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                .unwrap_or(0);
            ConfigError::new(&toml_field(&e), format!("line {line}: {}", e.message()))
        })?;
        let d = ExperimentConfig::default();
        Ok(ExperimentConfig {
            seed: raw.seed.unwrap_or(d.seed),
            n_samples: raw.n_samples.unwrap_or(d.n_samples),
            threads: raw.threads.unwrap_or(d.threads),
            out: raw.out.unwrap_or(d.out),
            input: raw.input,
            generator: section("generator", raw.generator, d.generator)?,
            transforms: raw.transforms.unwrap_or_default(),
            test: section("test", raw.test, d.test)?,
            shift: section("shift", raw.shift, d.shift)?,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn generator_spec(&self) -> GeneratorSpec {
        let g = &self.generator;
        GeneratorSpec {
            kind: g.kind,
            intensity: g.intensity,
            dim: g.dim,
            window: g.window,
            grid: g.grid,
            base_level: g.base_level,
            count: g.count,
            control: g.control,
        }
    }

    /// The shift for samples of dimension `dim`.
    pub fn shift_mode(&self, dim: usize) -> ShiftMode {
        let s = &self.shift;
        match s.mode {
            ShiftKind::Line => {
                let direction = s.direction.clone().unwrap_or_else(|| {
                    let mut u = vec![0.0; dim];
                    u[0] = 1.0;
                    u
                });
                ShiftMode::Line { direction, laps: s.laps }
            }
            ShiftKind::Example1 => ShiftMode::Example1 {
                n: s.n,
                extend: s.extend,
                subdivide: s.subdivide,
                bits: s.bits,
            },
        }
    }

    /// Whether the samples entering the transform chain carry a density.
    fn generator_is_diffuse(&self) -> bool {
        self.generator.kind == GeneratorKind::ShotNoiseDensity
    }

    /// Check every field; the error names the first offending one.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_samples < 2 {
            return Err(ConfigError::new("n_samples", format!("must be at least 2, got {}", self.n_samples)));
        }
        if self.input.is_none() {
            self.generator_spec().validate().map_err(|e| {
                let text = e.to_string();
                let detail = text.trim_start_matches("invalid parameter: ");
                let (field, msg) = detail.split_once(": ").unwrap_or(("config", detail));
                ConfigError::new(&format!("generator.{field}"), msg)
            })?;
        }
        let t = &self.test;
        if !(t.level > 0.0 && t.level < 1.0) {
            return Err(ConfigError::new("test.level", format!("must lie in (0, 1), got {}", t.level)));
        }
        if t.n_perm == 0 {
            return Err(ConfigError::new("test.n_perm", "must be positive"));
        }
        if t.n_list.is_empty() || t.n_list.contains(&0) {
            return Err(ConfigError::new("test.n_list", "needs positive box sides"));
        }
        if t.bins < 2 {
            return Err(ConfigError::new("test.bins", "must be at least 2"));
        }
        let s = &self.shift;
        if s.r.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(ConfigError::new("shift.r", "values must be finite and nonnegative"));
        }
        if let Some(u) = &s.direction {
            if u.iter().all(|x| *x == 0.0) {
                return Err(ConfigError::new("shift.direction", "must not be the zero vector"));
            }
        }
        if s.mode == ShiftKind::Example1 && s.n == 0 {
            return Err(ConfigError::new("shift.n", "must be positive"));
        }
        if s.mode == ShiftKind::Example1 && !(40..=60).contains(&s.bits) {
            return Err(ConfigError::new("shift.bits", "must lie in 40..=60"));
        }
        // the chain is checked only when the input kind is known
        if self.input.is_none() {
            let mut diffuse = self.generator_is_diffuse();
            for (i, t) in self.transforms.iter().enumerate() {
                match t {
                    Transform::DensityPalm | Transform::DensityInverse if !diffuse => {
                        return Err(ConfigError::new(
                            &format!("transforms[{i}]"),
                            format!("{t:?} needs a density generator or a preceding product_extend"),
                        ));
                    }
                    Transform::ProductExtend => diffuse = true,
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn section<T>(name: &str, table: Option<toml::Table>, default: T) -> Result<T, ConfigError>
where
    T: Serialize + for<'de> Deserialize<'de>,
{
    let Some(table) = table else {
        return Ok(default);
    };
    // overlay the given keys on the defaults
    let mut base = toml::Table::try_from(&default).expect("defaults serialize");
    for (k, v) in table {
        base.insert(k, v);
    }
    T::deserialize(toml::Value::Table(base)).map_err(|e| {
        let field = format!("{name}.{}", toml_field(&e));
        ConfigError::new(&field, e.message().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_sections_keep_defaults() {
        let c = ExperimentConfig::from_toml("seed = 4\n[generator]\nkind = \"poisson\"\n[test]\nlevel = 0.01\n").unwrap();
        assert_eq!(c.seed, 4);
        assert_eq!(c.generator.kind, GeneratorKind::Poisson);
        assert_eq!(c.generator.window, 8);
        assert_eq!(c.test.level, 0.01);
        assert_eq!(c.test.n_perm, 999);
        c.validate().unwrap();
    }

    #[test]
    fn echo_reads_back() {
        let mut c = ExperimentConfig::default();
        c.transforms = vec![Transform::ProductExtend, Transform::DensityPalm];
        c.shift.direction = Some(vec![1.0]);
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn errors_name_the_field() {
        let c = ExperimentConfig::from_toml("[generator]\nintensity = -1.0\n").unwrap();
        let e = c.validate().unwrap_err();
        assert_eq!(e.field, "generator.intensity");
        let e = ExperimentConfig::from_toml("[generator]\nwidnow = 3\n").unwrap_err();
        assert!(e.field.contains("widnow"), "{e}");
        let e = ExperimentConfig::from_toml("[test]\nlevel = \"x\"\n").unwrap_err();
        assert!(e.field.starts_with("test"), "{e}");
        let mut c = ExperimentConfig::default();
        c.transforms = vec![Transform::DensityPalm];
        assert_eq!(c.validate().unwrap_err().field, "transforms[0]");
    }
}
