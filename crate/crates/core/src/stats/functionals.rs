//! Scalar summaries of a rooted sample seen from its origin.

use serde::{Deserialize, Serialize};

use crate::measure::{torus_distance, Cuboid};
use crate::preserving::RootedSample;

/// Atoms closer than this to the origin are ignored by the nearest-atom summary.
pub const SELF_TOL: f64 = 1e-9;

/// What a functional sees: a sample with its origin, and optional
/// auxiliary point and background position.
#[derive(Clone, Copy, Debug)]
pub struct View<'a> {
    pub rooted: &'a RootedSample,
    pub aux: Option<&'a [f64]>,
    pub background: Option<&'a [f64]>,
}

impl<'a> View<'a> {
    pub fn new(rooted: &'a RootedSample) -> Self {
        View {
            rooted,
            aux: None,
            background: None,
        }
    }

    pub fn with_aux(mut self, aux: &'a [f64]) -> Self {
        self.aux = Some(aux);
        self
    }

    pub fn with_background(mut self, y: &'a [f64]) -> Self {
        self.background = Some(y);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    /// `ξ([0, a)^d)` from the origin.
    Mass { side: f64 },
    /// `ξ([-1, 0)^d)`.
    MassBehind,
    /// Distance to the nearest atom away from the origin, capped at `W/2`.
    NearestAtom,
    /// Density of the cell holding the origin.
    DensityAtOrigin,
    /// Mean of the mark grid over `[0, 1)^d`.
    MarkMean,
    /// Coordinate of the auxiliary point.
    Aux { axis: usize },
    /// Coordinate of the background position at the origin.
    Background { axis: usize },
    /// Sub-cell offset of the origin.
    Root { axis: usize },
}

impl Functional {
    pub fn name(&self) -> String {
        match self {
            Functional::Mass { side } => format!("mass_{side}"),
            Functional::MassBehind => "mass_behind".into(),
            Functional::NearestAtom => "nearest_atom".into(),
            Functional::DensityAtOrigin => "density_at_origin".into(),
            Functional::MarkMean => "mark_mean".into(),
            Functional::Aux { axis } => format!("aux_{axis}"),
            Functional::Background { axis } => format!("background_{axis}"),
            Functional::Root { axis } => format!("root_{axis}"),
        }
    }

    pub fn eval(&self, v: &View) -> f64 {
        let s = &v.rooted.sample;
        let root = &v.rooted.root;
        let m = &s.measure;
        let w = m.side() as f64;
        match self {
            Functional::Mass { side } => {
                let hi: Vec<f64> = root.iter().map(|r| r + side.min(w)).collect();
                m.mass(&Cuboid::new(root.clone(), hi))
            }
            Functional::MassBehind => {
                let lo: Vec<f64> = root.iter().map(|r| r - 1.0).collect();
                m.mass(&Cuboid::new(lo, root.clone()))
            }
            Functional::NearestAtom => m
                .atoms()
                .iter()
                .map(|a| torus_distance(&a.loc, root, w))
                .filter(|d| *d > SELF_TOL)
                .fold(w / 2.0, f64::min),
            Functional::DensityAtOrigin => m.density_at_origin().unwrap_or(0.0),
            Functional::MarkMean => {
                let hi: Vec<f64> = root.iter().map(|r| r + 1.0).collect();
                s.marks.mean_over(&Cuboid::new(root.clone(), hi))
            }
            Functional::Aux { axis } => v.aux.map_or(0.0, |a| a[*axis]),
            Functional::Background { axis } => v.background.map_or(0.0, |y| y[*axis]),
            Functional::Root { axis } => root[*axis],
        }
    }
}

/// An ordered, nonempty list of functionals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSet {
    items: Vec<Functional>,
}

impl FunctionalSet {
    pub fn new(items: Vec<Functional>) -> Self {
        assert!(!items.is_empty(), "a functional set needs at least one member");
        FunctionalSet { items }
    }

    /// Box masses, nearest atom, density at the origin and the mark mean.
    pub fn standard() -> Self {
        FunctionalSet::new(vec![
            Functional::Mass { side: 1.0 },
            Functional::Mass { side: 2.0 },
            Functional::Mass { side: 4.0 },
            Functional::MassBehind,
            Functional::NearestAtom,
            Functional::DensityAtOrigin,
            Functional::MarkMean,
        ])
    }

    pub fn with_aux(mut self, dim: usize) -> Self {
        self.items.extend((0..dim).map(|axis| Functional::Aux { axis }));
        self
    }

    pub fn with_background(mut self, dim: usize) -> Self {
        self.items.extend((0..dim).map(|axis| Functional::Background { axis }));
        self
    }

    pub fn with_root(mut self, dim: usize) -> Self {
        self.items.extend((0..dim).map(|axis| Functional::Root { axis }));
        self
    }

    pub fn items(&self) -> &[Functional] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.items.iter().map(Functional::name).collect()
    }

    pub fn eval(&self, v: &View) -> Vec<f64> {
        self.items.iter().map(|f| f.eval(v)).collect()
    }
}
