//! Random-measure realizations and mark fields on the torus `[0, W)^d`.
//!
//! A [`MeasureWindow`] is a finite list of atoms plus an optional density that
//! is constant on the cells of a regular grid with `G` cells per unit length.
//! Shifts follow `θ_t ξ(B) = ξ(B + t)`: atoms move by `-t` modulo `W`, grids
//! rotate so that the cell containing `t` becomes the cell at the origin.

use rand::Rng;

use crate::error::{Error, Result};

/// Offset applied to generated coordinates that land exactly on a cell face.
pub const BOUNDARY_NUDGE: f64 = 1.0 / (1u64 << 40) as f64;

/// Reduce `x` into `[0, side)`.
#[inline]
pub fn wrap(x: f64, side: f64) -> f64 {
    let y = x.rem_euclid(side);
    if y >= side {
        0.0
    } else {
        y
    }
}

/// Minimal-image difference `a - b` on a circle of length `side`, in `[-side/2, side/2)`.
#[inline]
pub fn torus_delta(a: f64, b: f64, side: f64) -> f64 {
    let d = (a - b).rem_euclid(side);
    if d >= side / 2.0 {
        d - side
    } else {
        d
    }
}

/// Euclidean distance on the flat torus.
pub fn torus_distance(a: &[f64], b: &[f64], side: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| torus_delta(*x, *y, side).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Nudge a coordinate off grid faces at resolution `res`.
pub fn nudge_off_boundary(x: f64, res: u32, side: f64) -> f64 {
    let scaled = x * res as f64;
    if scaled == scaled.floor() {
        wrap(x + BOUNDARY_NUDGE, side)
    } else {
        x
    }
}

/// Axis-aligned half-open box `[lo, hi)`, interpreted on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct Cuboid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Cuboid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "corner dimensions differ");
        Cuboid { lo, hi }
    }

    /// `[corner, corner + side)^d`.
    pub fn cube(corner: &[f64], side: f64) -> Self {
        Cuboid {
            lo: corner.to_vec(),
            hi: corner.iter().map(|c| c + side).collect(),
        }
    }

    /// `[0, side)^d`.
    pub fn origin_cube(dim: usize, side: f64) -> Self {
        Cuboid::cube(&vec![0.0; dim], side)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    /// Membership modulo the torus side.
    pub fn contains(&self, x: &[f64], side: f64) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(&x, (&lo, &hi))| {
            // reduce both ends first: `x - lo` with `lo < 0` can round up to a whole lap
            let mut rel = wrap(x, side) - wrap(lo, side);
            if rel < 0.0 {
                rel += side;
            }
            rel < hi - lo
        })
    }

    pub fn translated(&self, t: &[f64]) -> Cuboid {
        Cuboid {
            lo: self.lo.iter().zip(t).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(t).map(|(a, b)| a + b).collect(),
        }
    }
}

/// A piecewise-constant scalar field on the `(W·G)^d` cells of the torus.
/// Cell `(c_0, …, c_{d-1})` is stored at `Σ c_k M^k` with `M = W·G`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    side: u32,
    res: u32,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(dim: usize, side: u32, res: u32, values: Vec<f64>) -> Result<Self> {
        let expected = (side as usize * res as usize).pow(dim as u32);
        if values.len() != expected {
            return Err(Error::InvalidMeasure(format!(
                "grid has {} cells, expected {expected}",
                values.len()
            )));
        }
        Ok(Grid {
            dim,
            side,
            res,
            values,
        })
    }

    pub fn constant(dim: usize, side: u32, res: u32, value: f64) -> Self {
        let n = (side as usize * res as usize).pow(dim as u32);
        Grid {
            dim,
            side,
            res,
            values: vec![value; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn side(&self) -> u32 {
        self.side
    }
    pub fn res(&self) -> u32 {
        self.res
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Cells per axis.
    pub fn cells_per_axis(&self) -> usize {
        self.side as usize * self.res as usize
    }

    pub fn cell_volume(&self) -> f64 {
        (1.0 / self.res as f64).powi(self.dim as i32)
    }

    pub fn index(&self, cell: &[usize]) -> usize {
        let m = self.cells_per_axis();
        cell.iter().rev().fold(0, |acc, &c| acc * m + c)
    }

    pub fn cell_of_index(&self, mut idx: usize) -> Vec<usize> {
        let m = self.cells_per_axis();
        (0..self.dim)
            .map(|_| {
                let c = idx % m;
                idx /= m;
                c
            })
            .collect()
    }

    /// Cell containing the point `x` (taken modulo the torus).
    pub fn cell_of_point(&self, x: &[f64]) -> Vec<usize> {
        let m = self.cells_per_axis();
        let g = self.res as f64;
        x.iter()
            .map(|&v| {
                let c = (wrap(v, self.side as f64) * g).floor() as usize;
                c.min(m - 1)
            })
            .collect()
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.values[self.index(&self.cell_of_point(x))]
    }

    /// `new[c] = old[c + k]` for a cell offset `k`.
    pub fn rotated(&self, k: &[i64]) -> Grid {
        let m = self.cells_per_axis();
        let mi = m as i64;
        if k.iter().all(|&v| v.rem_euclid(mi) == 0) {
            return self.clone();
        }
        let mut out = vec![0.0; self.values.len()];
        let mut cell = vec![0usize; self.dim];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut rem = idx;
            for (c, &kk) in cell.iter_mut().zip(k) {
                *c = ((rem % m) as i64 + kk).rem_euclid(mi) as usize;
                rem /= m;
            }
            *slot = self.values[self.index(&cell)];
        }
        Grid {
            values: out,
            ..*self
        }
    }

    /// Cell offset realizing a shift by `t`: the cell containing `t`.
    pub fn cell_offset(&self, t: &[f64]) -> Vec<i64> {
        let g = self.res as f64;
        t.iter().map(|&v| (v * g).floor() as i64).collect()
    }

    /// Extend constantly along one extra trailing axis.
    pub fn extended(&self) -> Grid {
        let m = self.cells_per_axis();
        let mut values = Vec::with_capacity(self.values.len() * m);
        for _ in 0..m {
            values.extend_from_slice(&self.values);
        }
        Grid {
            dim: self.dim + 1,
            side: self.side,
            res: self.res,
            values,
        }
    }
}

/// A point mass.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub loc: Vec<f64>,
    pub mass: f64,
}

impl Atom {
    pub fn new(loc: Vec<f64>, mass: f64) -> Self {
        Atom { loc, mass }
    }
}

/// Overlap of a torus interval with one grid column.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Segment {
    pub cell: usize,
    /// Start of the overlap in unwrapped coordinates.
    pub start: f64,
    pub len: f64,
}

/// Split `[lo, hi)` into its overlaps with the grid columns of a circle
/// of `side` units at resolution `res`.
pub(crate) fn axis_segments(lo: f64, hi: f64, side: u32, res: u32) -> Vec<Segment> {
    let g = res as f64;
    let m = (side * res) as i64;
    let first = (lo * g).floor() as i64;
    let last = (hi * g).ceil() as i64 - 1;
    let mut out = Vec::with_capacity((last - first + 1).max(0) as usize);
    for c in first..=last {
        let a = lo.max(c as f64 / g);
        let b = hi.min((c + 1) as f64 / g);
        if b > a {
            out.push(Segment {
                cell: c.rem_euclid(m) as usize,
                start: a,
                len: b - a,
            });
        }
    }
    out
}

/// Visit every product of per-axis segments.
pub(crate) fn for_each_piece(axes: &[Vec<Segment>], mut f: impl FnMut(&[&Segment])) {
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let d = axes.len();
    let mut pos = vec![0usize; d];
    let mut cur: Vec<&Segment> = axes.iter().map(|a| &a[0]).collect();
    loop {
        f(&cur);
        let mut k = 0;
        loop {
            if k == d {
                return;
            }
            pos[k] += 1;
            if pos[k] < axes[k].len() {
                cur[k] = &axes[k][pos[k]];
                break;
            }
            pos[k] = 0;
            cur[k] = &axes[k][0];
            k += 1;
        }
    }
}

/// One realization `ξ` of a random measure on the torus window.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureWindow {
    dim: usize,
    side: u32,
    res: u32,
    atoms: Vec<Atom>,
    density: Option<Grid>,
}

impl MeasureWindow {
    /// The null measure.
    pub fn empty(dim: usize, side: u32, res: u32) -> Self {
        assert!(dim > 0 && side > 0 && res > 0, "dim, side and res must be positive");
        MeasureWindow {
            dim,
            side,
            res,
            atoms: Vec::new(),
            density: None,
        }
    }

    pub fn from_atoms(dim: usize, side: u32, res: u32, atoms: Vec<Atom>) -> Result<Self> {
        let mut m = MeasureWindow::empty(dim, side, res);
        for a in atoms {
            m.push_atom(a)?;
        }
        Ok(m)
    }

    pub fn from_density(density: Grid) -> Result<Self> {
        let mut m = MeasureWindow::empty(density.dim(), density.side(), density.res());
        m.set_density(density)?;
        Ok(m)
    }

    pub fn push_atom(&mut self, atom: Atom) -> Result<()> {
        if atom.loc.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: atom.loc.len(),
            });
        }
        if !(atom.mass.is_finite() && atom.mass > 0.0) {
            return Err(Error::InvalidMeasure(format!("atom mass {}", atom.mass)));
        }
        let w = self.side as f64;
        if atom.loc.iter().any(|x| !(x.is_finite() && *x >= 0.0 && *x < w)) {
            return Err(Error::InvalidMeasure(format!(
                "atom at {:?} outside [0, {w})",
                atom.loc
            )));
        }
        self.atoms.push(atom);
        Ok(())
    }

    pub fn set_density(&mut self, density: Grid) -> Result<()> {
        if density.dim() != self.dim || density.side() != self.side || density.res() != self.res {
            return Err(Error::InvalidMeasure(
                "density grid geometry does not match the window".into(),
            ));
        }
        if let Some(v) = density.values().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("density cell value {v}")));
        }
        self.density = Some(density);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn side(&self) -> u32 {
        self.side
    }
    pub fn res(&self) -> u32 {
        self.res
    }
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
    pub fn density(&self) -> Option<&Grid> {
        self.density.as_ref()
    }
    pub fn is_diffuse(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when every density cell is strictly positive.
    pub fn has_positive_density(&self) -> bool {
        self.density
            .as_ref()
            .is_some_and(|g| g.values().iter().all(|v| *v > 0.0))
    }

    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        let dens = self
            .density
            .as_ref()
            .map_or(0.0, |g| g.values().iter().sum::<f64>() * g.cell_volume());
        atoms + dens
    }

    fn check_box(&self, b: &Cuboid) {
        assert_eq!(b.dim(), self.dim, "box dimension");
        let w = self.side as f64;
        debug_assert!(
            b.lo.iter().zip(&b.hi).all(|(l, h)| h >= l && h - l <= w),
            "box side must lie in [0, W]"
        );
    }

    /// `ξ(B)`: atoms in the box plus the density integral over it.
    pub fn mass(&self, b: &Cuboid) -> f64 {
        self.check_box(b);
        let w = self.side as f64;
        let mut total: f64 = self
            .atoms
            .iter()
            .filter(|a| b.contains(&a.loc, w))
            .map(|a| a.mass)
            .sum();
        if let Some(g) = &self.density {
            let axes: Vec<Vec<Segment>> = (0..self.dim)
                .map(|k| axis_segments(b.lo[k], b.hi[k], self.side, self.res))
                .collect();
            let mut cell = vec![0usize; self.dim];
            for_each_piece(&axes, |segs| {
                let mut vol = 1.0;
                for (c, s) in cell.iter_mut().zip(segs) {
                    *c = s.cell;
                    vol *= s.len;
                }
                total += g.values[g.index(&cell)] * vol;
            });
        }
        // an empty float sum is -0
        total + 0.0
    }

    /// Draw a point from `ξ(· | B)`.
    pub fn sample_conditional<R: Rng + ?Sized>(&self, b: &Cuboid, rng: &mut R) -> Result<Vec<f64>> {
        self.check_box(b);
        let w = self.side as f64;
        enum Piece {
            Atom(usize),
            Cell(Vec<(f64, f64)>),
        }
        let mut pieces: Vec<(f64, Piece)> = Vec::new();
        for (i, a) in self.atoms.iter().enumerate() {
            if b.contains(&a.loc, w) {
                pieces.push((a.mass, Piece::Atom(i)));
            }
        }
        if let Some(g) = &self.density {
            let axes: Vec<Vec<Segment>> = (0..self.dim)
                .map(|k| axis_segments(b.lo[k], b.hi[k], self.side, self.res))
                .collect();
            let mut cell = vec![0usize; self.dim];
            for_each_piece(&axes, |segs| {
                let mut vol = 1.0;
                for (c, s) in cell.iter_mut().zip(segs) {
                    *c = s.cell;
                    vol *= s.len;
                }
                let m = g.values[g.index(&cell)] * vol;
                if m > 0.0 {
                    pieces.push((m, Piece::Cell(segs.iter().map(|s| (s.start, s.len)).collect())));
                }
            });
        }
        let total: f64 = pieces.iter().map(|p| p.0).sum();
        if pieces.is_empty() || total <= 0.0 {
            return Err(Error::ZeroMassBox);
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = pieces.len() - 1;
        for (i, (m, _)) in pieces.iter().enumerate() {
            acc += m;
            if target < acc {
                chosen = i;
                break;
            }
        }
        Ok(match &pieces[chosen].1 {
            Piece::Atom(i) => self.atoms[*i].loc.clone(),
            Piece::Cell(extent) => extent
                .iter()
                .map(|&(start, len)| {
                    let mut x = start + rng.random::<f64>() * len;
                    if x >= start + len {
                        x = start;
                    }
                    wrap(x, w)
                })
                .collect(),
        })
    }

    /// `θ_t ξ`.
    pub fn shifted(&self, t: &[f64]) -> MeasureWindow {
        assert_eq!(t.len(), self.dim, "shift dimension");
        let w = self.side as f64;
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                loc: a.loc.iter().zip(t).map(|(x, s)| wrap(x - s, w)).collect(),
                mass: a.mass,
            })
            .collect();
        let density = self.density.as_ref().map(|g| g.rotated(&g.cell_offset(t)));
        MeasureWindow {
            atoms,
            density,
            ..*self
        }
    }

    /// Density value of the cell containing the origin.
    pub fn density_at_origin(&self) -> Option<f64> {
        self.density.as_ref().map(|g| g.values()[0])
    }

    /// `0 ∈ supp ξ`, tested on the box `[-tol, tol)^d`.
    pub fn origin_in_support(&self, tol: f64) -> bool {
        let b = Cuboid::new(vec![-tol; self.dim], vec![tol; self.dim]);
        self.mass(&b) > 0.0
    }

    /// `ξ ⊗ λ₁` on the `(d+1)`-torus. Atoms become columns of constant
    /// density along the new axis in the cell that contains them.
    pub fn product_extended(&self) -> MeasureWindow {
        let mut base = match &self.density {
            Some(g) => g.clone(),
            None => Grid::constant(self.dim, self.side, self.res, 0.0),
        };
        let line_density = (self.res as f64).powi(self.dim as i32);
        for a in &self.atoms {
            let idx = base.index(&base.cell_of_point(&a.loc));
            base.values[idx] += a.mass * line_density;
        }
        MeasureWindow {
            dim: self.dim + 1,
            side: self.side,
            res: self.res,
            atoms: Vec::new(),
            density: Some(base.extended()),
        }
    }
}

/// A mark attached to a point location.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedPoint {
    pub loc: Vec<f64>,
    pub mark: f64,
}

/// The auxiliary random element `X`: a mark grid plus optional marked points,
/// shifted rigidly together with the measure.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkField {
    grid: Grid,
    points: Vec<MarkedPoint>,
}

impl MarkField {
    pub fn new(grid: Grid) -> Self {
        MarkField {
            grid,
            points: Vec::new(),
        }
    }

    pub fn blank(dim: usize, side: u32, res: u32) -> Self {
        MarkField::new(Grid::constant(dim, side, res, 0.0))
    }

    pub fn with_points(mut self, points: Vec<MarkedPoint>) -> Self {
        self.points = points;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn shifted(&self, t: &[f64]) -> MarkField {
        let w = self.grid.side() as f64;
        MarkField {
            grid: self.grid.rotated(&self.grid.cell_offset(t)),
            points: self
                .points
                .iter()
                .map(|p| MarkedPoint {
                    loc: p.loc.iter().zip(t).map(|(x, s)| wrap(x - s, w)).collect(),
                    mark: p.mark,
                })
                .collect(),
        }
    }

    /// Constant extension along a new trailing axis; marked points are
    /// replicated at every cell centre of that axis so that shifts along it
    /// by whole cells act trivially.
    pub fn extended(&self) -> MarkField {
        let m = self.grid.cells_per_axis();
        let g = self.grid.res() as f64;
        let mut points = Vec::with_capacity(self.points.len() * m);
        for j in 0..m {
            let h = (j as f64 + 0.5) / g;
            points.extend(self.points.iter().map(|p| {
                let mut loc = p.loc.clone();
                loc.push(h);
                MarkedPoint { loc, mark: p.mark }
            }));
        }
        MarkField {
            grid: self.grid.extended(),
            points,
        }
    }

    /// Mean of the mark grid over the cells meeting `b`, weighted by overlap.
    pub fn mean_over(&self, b: &Cuboid) -> f64 {
        let g = &self.grid;
        let axes: Vec<Vec<Segment>> = (0..g.dim())
            .map(|k| axis_segments(b.lo[k], b.hi[k], g.side(), g.res()))
            .collect();
        let mut acc = 0.0;
        let mut vol_total = 0.0;
        let mut cell = vec![0usize; g.dim()];
        for_each_piece(&axes, |segs| {
            let mut vol = 1.0;
            for (c, s) in cell.iter_mut().zip(segs) {
                *c = s.cell;
                vol *= s.len;
            }
            acc += g.values()[g.index(&cell)] * vol;
            vol_total += vol;
        });
        if vol_total > 0.0 {
            acc / vol_total
        } else {
            0.0
        }
    }
}

/// `(X, ξ, w)`: a mark field, a measure and an importance weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample {
    pub marks: MarkField,
    pub measure: MeasureWindow,
    weight: f64,
    /// Pending density factor kept apart so that dividing it out again is exact.
    density_factor: Option<f64>,
}

impl WeightedSample {
    pub fn new(marks: MarkField, measure: MeasureWindow, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidWeight(weight));
        }
        if marks.dim() != measure.dim() {
            return Err(Error::DimensionMismatch {
                expected: measure.dim(),
                found: marks.dim(),
            });
        }
        Ok(WeightedSample {
            marks,
            measure,
            weight,
            density_factor: None,
        })
    }

    /// A weight-one sample with a blank mark grid.
    pub fn unmarked(measure: MeasureWindow) -> Self {
        let marks = MarkField::blank(measure.dim(), measure.side(), measure.res());
        WeightedSample {
            marks,
            measure,
            weight: 1.0,
            density_factor: None,
        }
    }

    pub fn weight(&self) -> f64 {
        match self.density_factor {
            Some(z) => self.weight * z,
            None => self.weight,
        }
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub(crate) fn base_weight(&self) -> f64 {
        self.weight
    }

    pub(crate) fn density_factor(&self) -> Option<f64> {
        self.density_factor
    }

    /// Multiply the weight by `factor`, which must keep it finite and positive.
    pub fn reweighted(mut self, factor: f64) -> Result<Self> {
        let w = self.weight * factor;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidWeight(w));
        }
        self.weight = w;
        Ok(self)
    }

    /// Multiply by a density value `z > 0`, remembered so that
    /// [`WeightedSample::divide_density`] by the same value is exact.
    pub(crate) fn multiply_density(mut self, z: f64) -> Result<Self> {
        let folded = self.weight();
        if !(z.is_finite() && z > 0.0 && (folded * z).is_finite()) {
            return Err(Error::InvalidWeight(folded * z));
        }
        self.weight = folded;
        self.density_factor = Some(z);
        Ok(self)
    }

    pub(crate) fn divide_density(mut self, z: f64) -> Result<Self> {
        if self.density_factor == Some(z) {
            self.density_factor = None;
            return Ok(self);
        }
        let w = self.weight() / z;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidWeight(w));
        }
        self.weight = w;
        self.density_factor = None;
        Ok(self)
    }

    /// `θ_t (X, ξ)` with the weight unchanged.
    pub fn shifted(&self, t: &[f64]) -> WeightedSample {
        WeightedSample {
            marks: self.marks.shifted(t),
            measure: self.measure.shifted(t),
            weight: self.weight,
            density_factor: self.density_factor,
        }
    }

    /// `(X, ξ ⊗ λ₁)`; the extra shift coordinate acts trivially on the marks.
    pub fn product_extended(&self) -> WeightedSample {
        WeightedSample {
            marks: self.marks.extended(),
            measure: self.measure.product_extended(),
            weight: self.weight,
            density_factor: self.density_factor,
        }
    }
}

/// Free-function form of [`WeightedSample::shifted`].
pub fn shift(sample: &WeightedSample, t: &[f64]) -> WeightedSample {
    sample.shifted(t)
}

/// Free-function form of [`MeasureWindow::mass`].
pub fn mass(measure: &MeasureWindow, b: &Cuboid) -> f64 {
    measure.mass(b)
}

/// Free-function form of [`MeasureWindow::sample_conditional`].
pub fn sample_conditional<R: Rng + ?Sized>(
    measure: &MeasureWindow,
    b: &Cuboid,
    rng: &mut R,
) -> Result<Vec<f64>> {
    measure.sample_conditional(b, rng)
}

/// Free-function form of [`WeightedSample::product_extended`].
pub fn product_extend(sample: &WeightedSample) -> WeightedSample {
    sample.product_extended()
}

/// Free-function form of [`MeasureWindow::origin_in_support`].
pub fn origin_in_support(measure: &MeasureWindow, tol: f64) -> bool {
    measure.origin_in_support(tol)
}
