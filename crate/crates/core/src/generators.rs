//! Seeded ensemble generators: Poisson and its Palm version, mixtures,
//! shot-noise densities, and controls that are not mass-stationary.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{nudge_off_boundary, wrap, Atom, Grid, MarkField, MeasureWindow, WeightedSample};
use crate::rng::{stream, SimRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Poisson,
    PalmPoisson,
    MixedPoisson,
    ShotNoiseDensity,
    Binomial,
    NegativeControl,
}

/// Which non-stationary control to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    /// Palm–Poisson plus a fixed atom at `(1, 0, …)`.
    #[default]
    ExtraAtom,
    /// Poisson with a linear intensity ramp along axis 0, plus an atom at 0.
    Ramp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub intensity: f64,
    pub dim: usize,
    pub window: u32,
    pub grid: u32,
    /// Shot-noise base level `c`.
    #[serde(default = "default_base")]
    pub base_level: f64,
    /// Atom count for the binomial kind.
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub control: ControlKind,
}

fn default_base() -> f64 {
    0.5
}

/// Relative slope of the ramp control.
pub const RAMP_SLOPE: f64 = 0.9;

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, intensity: f64, dim: usize, window: u32, grid: u32) -> Self {
        GeneratorSpec {
            kind,
            intensity,
            dim,
            window,
            grid,
            base_level: default_base(),
            count: 0,
            control: ControlKind::default(),
        }
    }

    /// Check every parameter; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::InvalidParameter(format!("{field}: {msg}")));
        if self.dim == 0 {
            return bad("dim", "must be at least 1".into());
        }
        if self.window == 0 {
            return bad("window", "must be a positive integer".into());
        }
        if self.grid == 0 {
            return bad("grid", "must be a positive integer".into());
        }
        let needs_intensity = !matches!(self.kind, GeneratorKind::Binomial);
        if needs_intensity && !(self.intensity.is_finite() && self.intensity > 0.0) {
            return bad("intensity", format!("must be positive, got {}", self.intensity));
        }
        if self.kind == GeneratorKind::ShotNoiseDensity && !(self.base_level.is_finite() && self.base_level > 0.0) {
            return bad("base_level", format!("must be positive, got {}", self.base_level));
        }
        if self.kind == GeneratorKind::Binomial && self.count == 0 {
            return bad("count", "must be at least 1".into());
        }
        Ok(())
    }

    fn volume(&self) -> f64 {
        (self.window as f64).powi(self.dim as i32)
    }

    /// Probability that an unconditioned draw has at least one atom, for the
    /// kinds that condition on it; one otherwise.
    pub fn conditioning_probability(&self) -> f64 {
        match self.kind {
            GeneratorKind::Poisson => -(-self.intensity * self.volume()).exp_m1(),
            GeneratorKind::MixedPoisson => {
                let v = self.volume();
                let a = -(-0.5 * self.intensity * v).exp_m1();
                let b = -(-1.5 * self.intensity * v).exp_m1();
                0.5 * (a + b)
            }
            _ => 1.0,
        }
    }
}

fn uniform_point<R: Rng + ?Sized>(dim: usize, side: u32, res: u32, rng: &mut R) -> Vec<f64> {
    let w = side as f64;
    (0..dim)
        .map(|_| nudge_off_boundary(wrap(rng.random::<f64>() * w, w), res, w))
        .collect()
}

fn noise_marks<R: Rng + ?Sized>(dim: usize, side: u32, res: u32, rng: &mut R) -> MarkField {
    let cells = ((side * res) as usize).pow(dim as u32);
    let vals: Vec<f64> = (0..cells).map(|_| StandardNormal.sample(rng)).collect();
    MarkField::new(Grid::new(dim, side, res, vals).expect("grid size matches"))
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    Poisson::new(mean).expect("positive mean").sample(rng) as usize
}

fn unit_atoms<R: Rng + ?Sized>(spec: &GeneratorSpec, count: usize, rng: &mut R) -> Vec<Atom> {
    (0..count)
        .map(|_| Atom::new(uniform_point(spec.dim, spec.window, spec.grid, rng), 1.0))
        .collect()
}

fn assemble(spec: &GeneratorSpec, marks: MarkField, atoms: Vec<Atom>) -> Result<WeightedSample> {
    let m = MeasureWindow::from_atoms(spec.dim, spec.window, spec.grid, atoms)?;
    WeightedSample::new(marks, m, 1.0)
}

/// Poisson process conditioned on at least one atom; unit masses, iid
/// normal mark grid.
pub fn gen_poisson<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<WeightedSample> {
    let mean = spec.intensity * spec.volume();
    let count = loop {
        let c = poisson_count(mean, rng);
        if c > 0 {
            break c;
        }
    };
    let atoms = unit_atoms(spec, count, rng);
    let marks = noise_marks(spec.dim, spec.window, spec.grid, rng);
    assemble(spec, marks, atoms)
}

/// Unconditioned Poisson plus a unit atom at the origin.
pub fn gen_palm_poisson<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<WeightedSample> {
    let count = poisson_count(spec.intensity * spec.volume(), rng);
    let mut atoms = vec![Atom::new(vec![0.0; spec.dim], 1.0)];
    atoms.extend(unit_atoms(spec, count, rng));
    let marks = noise_marks(spec.dim, spec.window, spec.grid, rng);
    assemble(spec, marks, atoms)
}

/// Mixed Poisson: intensity `λ/2` or `3λ/2` with equal probability,
/// conditioned on at least one atom.
pub fn gen_mixed_poisson<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<WeightedSample> {
    let count = loop {
        let level = if rng.random::<bool>() { 0.5 } else { 1.5 };
        let c = poisson_count(level * spec.intensity * spec.volume(), rng);
        if c > 0 {
            break c;
        }
    };
    let atoms = unit_atoms(spec, count, rng);
    let marks = noise_marks(spec.dim, spec.window, spec.grid, rng);
    assemble(spec, marks, atoms)
}

/// Exactly `count` uniform unit atoms.
pub fn gen_binomial<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<WeightedSample> {
    let atoms = unit_atoms(spec, spec.count, rng);
    let marks = noise_marks(spec.dim, spec.window, spec.grid, rng);
    assemble(spec, marks, atoms)
}

/// The bump `k(x) = (1 - |x|²)₊`.
pub fn bump(r2: f64) -> f64 {
    (1.0 - r2).max(0.0)
}

/// `∫ k` over `R^d`: the unit-ball volume times `2 / (d + 2)`.
pub fn bump_integral(dim: usize) -> f64 {
    let d = dim as f64;
    let ball = std::f64::consts::PI.powf(d / 2.0) / statrs::function::gamma::gamma(d / 2.0 + 1.0);
    ball * 2.0 / (d + 2.0)
}

/// `Z = c + Σ k(s - x_i)` over Poisson centres, evaluated at cell centres.
/// The marks are `Z` itself.
pub fn gen_shot_noise_density<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<WeightedSample> {
    let count = poisson_count(spec.intensity * spec.volume(), rng);
    let centres: Vec<Vec<f64>> = (0..count)
        .map(|_| {
            let w = spec.window as f64;
            (0..spec.dim).map(|_| wrap(rng.random::<f64>() * w, w)).collect()
        })
        .collect();
    let mut z = Grid::constant(spec.dim, spec.window, spec.grid, spec.base_level);
    let h = 1.0 / spec.grid as f64;
    let w = spec.window as f64;
    for idx in 0..z.values().len() {
        let cell = z.cell_of_index(idx);
        let p: Vec<f64> = cell.iter().map(|&c| (c as f64 + 0.5) * h).collect();
        let extra: f64 = centres
            .iter()
            .map(|x| {
                let r2: f64 = p
                    .iter()
                    .zip(x)
                    .map(|(a, b)| crate::measure::torus_delta(*a, *b, w).powi(2))
                    .sum();
                bump(r2)
            })
            .sum();
        z.values_mut()[idx] += extra;
    }
    let marks = MarkField::new(z.clone());
    WeightedSample::new(marks, MeasureWindow::from_density(z)?, 1.0)
}

/// Controls with mass at the origin that are not mass-stationary.
pub fn gen_negative_control<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<WeightedSample> {
    match spec.control {
        ControlKind::ExtraAtom => {
            let mut s = gen_palm_poisson(spec, rng)?;
            let mut v = vec![0.0; spec.dim];
            v[0] = 1.0;
            s.measure.push_atom(Atom::new(v, 1.0))?;
            Ok(s)
        }
        ControlKind::Ramp => {
            let w = spec.window as f64;
            let peak = spec.intensity * (1.0 + RAMP_SLOPE);
            let count = poisson_count(peak * spec.volume(), rng);
            let mut atoms = vec![Atom::new(vec![0.0; spec.dim], 1.0)];
            for _ in 0..count {
                let p = uniform_point(spec.dim, spec.window, spec.grid, rng);
                let rate = spec.intensity * (1.0 + RAMP_SLOPE * (2.0 * p[0] / w - 1.0));
                if rng.random::<f64>() * peak < rate {
                    atoms.push(Atom::new(p, 1.0));
                }
            }
            let marks = noise_marks(spec.dim, spec.window, spec.grid, rng);
            assemble(spec, marks, atoms)
        }
    }
}

/// Draw one sample of the given kind.
pub fn generate<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<WeightedSample> {
    match spec.kind {
        GeneratorKind::Poisson => gen_poisson(spec, rng),
        GeneratorKind::PalmPoisson => gen_palm_poisson(spec, rng),
        GeneratorKind::MixedPoisson => gen_mixed_poisson(spec, rng),
        GeneratorKind::ShotNoiseDensity => gen_shot_noise_density(spec, rng),
        GeneratorKind::Binomial => gen_binomial(spec, rng),
        GeneratorKind::NegativeControl => gen_negative_control(spec, rng),
    }
}

/// `n` samples; sample `i` uses stream `i` of `seed`.
pub fn generate_ensemble(spec: &GeneratorSpec, n: usize, seed: u64) -> Result<Vec<WeightedSample>> {
    spec.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng: SimRng = stream(seed, i as u64);
            generate(spec, &mut rng)
        })
        .collect()
}
