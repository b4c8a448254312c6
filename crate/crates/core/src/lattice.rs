//! The lattice point process `N` of a measure, its Voronoi partition of the
//! torus lattice `{0, …, W-1}^d`, and the cell data `(D, S, D°)` at the origin.

use crate::error::{Error, Result};
use crate::measure::{Cuboid, MeasureWindow};

/// A lattice site with coordinates in `{0, …, W-1}`.
pub type Site = Vec<i64>;

/// How equidistant Voronoi candidates are ordered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// Lexicographic order of the displacement from the site to the
    /// candidate. Identical to lowest-lexicographic-point on the periodic
    /// lift, so the partition commutes with integer shifts.
    #[default]
    Covariant,
    /// Lexicographic order of the candidate's chart coordinates in
    /// `{0, …, W-1}^d`. Not shift-covariant when ties occur.
    Chart,
}

fn site_count(dim: usize, side: u32) -> usize {
    (side as usize).pow(dim as u32)
}

fn site_index(site: &[i64], side: u32) -> usize {
    let w = side as i64;
    site.iter()
        .rev()
        .fold(0usize, |acc, &c| acc * side as usize + c.rem_euclid(w) as usize)
}

fn site_of_index(mut idx: usize, dim: usize, side: u32) -> Site {
    (0..dim)
        .map(|_| {
            let c = (idx % side as usize) as i64;
            idx /= side as usize;
            c
        })
        .collect()
}

/// Minimal representative of `v` modulo `side` in `[-side/2, side/2)`.
fn minimal(v: i64, side: u32) -> i64 {
    let w = side as i64;
    let r = v.rem_euclid(w);
    if 2 * r >= w {
        r - w
    } else {
        r
    }
}

/// Sites `i` with `ξ(i + [0,1)^d) > 0`, in index order.
pub fn build_lattice_points(measure: &MeasureWindow) -> Result<Vec<Site>> {
    build_lattice_points_offset(measure, &vec![0.0; measure.dim()])
}

/// As [`build_lattice_points`] for the unit boxes `offset + i + [0,1)^d`.
pub fn build_lattice_points_offset(measure: &MeasureWindow, offset: &[f64]) -> Result<Vec<Site>> {
    let (dim, side) = (measure.dim(), measure.side());
    let aligned = offset.iter().all(|o| *o == 0.0);
    let points: Vec<Site> = if aligned && measure.density().is_none() {
        // atoms only: bucket directly
        let mut hit = vec![false; site_count(dim, side)];
        for a in measure.atoms() {
            let s: Site = a.loc.iter().map(|x| x.floor() as i64).collect();
            hit[site_index(&s, side)] = true;
        }
        hit.iter()
            .enumerate()
            .filter(|(_, h)| **h)
            .map(|(i, _)| site_of_index(i, dim, side))
            .collect()
    } else {
        (0..site_count(dim, side))
            .map(|i| site_of_index(i, dim, side))
            .filter(|s| {
                let corner: Vec<f64> = s.iter().zip(offset).map(|(c, o)| *c as f64 + o).collect();
                measure.mass(&Cuboid::cube(&corner, 1.0)) > 0.0
            })
            .collect()
    };
    if points.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    Ok(points)
}

/// Owner of every lattice site.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    dim: usize,
    side: u32,
    points: Vec<Site>,
    owner: Vec<usize>,
}

impl Assignment {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn side(&self) -> u32 {
        self.side
    }
    pub fn points(&self) -> &[Site] {
        &self.points
    }

    /// The `N`-point owning `site`.
    pub fn owner_of(&self, site: &[i64]) -> &Site {
        &self.points[self.owner[site_index(site, self.side)]]
    }

    /// All sites owned by `point`, in index order.
    pub fn cell_of(&self, point: &[i64]) -> Vec<Site> {
        let target = site_index(point, self.side);
        self.owner
            .iter()
            .enumerate()
            .filter(|(_, &o)| site_index(&self.points[o], self.side) == target)
            .map(|(i, _)| site_of_index(i, self.dim, self.side))
            .collect()
    }
}

/// Assign each site to its nearest `N`-point in torus distance.
pub fn voronoi_assign(points: &[Site], side: u32, dim: usize, tie: TieBreak) -> Assignment {
    assert!(!points.is_empty(), "voronoi_assign needs at least one point");
    let n_sites = site_count(dim, side);
    let mut owner = vec![0usize; n_sites];
    let mut delta = vec![0i64; dim];
    let mut best_delta = vec![0i64; dim];
    for (idx, slot) in owner.iter_mut().enumerate() {
        let site = site_of_index(idx, dim, side);
        let mut best: Option<(i64, usize)> = None;
        for (pi, p) in points.iter().enumerate() {
            let mut d2 = 0;
            for k in 0..dim {
                delta[k] = minimal(p[k] - site[k], side);
                d2 += delta[k] * delta[k];
            }
            let better = match best {
                None => true,
                Some((bd, bi)) => {
                    d2 < bd
                        || (d2 == bd
                            && match tie {
                                TieBreak::Covariant => delta < best_delta,
                                TieBreak::Chart => p < &points[bi],
                            })
                }
            };
            if better {
                best = Some((d2, pi));
                best_delta.copy_from_slice(&delta);
            }
        }
        *slot = best.expect("points nonempty").1;
    }
    Assignment {
        dim,
        side,
        points: points.to_vec(),
        owner,
    }
}

/// `(D, S, D°)`: the cell of the origin, the vector from its `N`-point to
/// the origin, and `S + D`.
pub fn cell_at_origin(assignment: &Assignment) -> (Vec<Site>, Vec<i64>, Vec<Site>) {
    let origin = vec![0i64; assignment.dim];
    let owner = assignment.owner_of(&origin).clone();
    let d = assignment.cell_of(&owner);
    let s: Vec<i64> = owner.iter().map(|&c| minimal(-c, assignment.side)).collect();
    let w = assignment.side as i64;
    let mut d_star: Vec<Site> = d
        .iter()
        .map(|site| site.iter().zip(&s).map(|(a, b)| (a + b).rem_euclid(w)).collect())
        .collect();
    d_star.sort_by_key(|site| site_index(site, assignment.side));
    (d, s, d_star)
}

/// Lattice points, Voronoi assignment and the origin's cell data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDecomposition {
    pub assignment: Assignment,
    pub cell_d: Vec<Site>,
    pub shift_s: Vec<i64>,
    pub cell_d_star: Vec<Site>,
}

impl CellDecomposition {
    pub fn lattice_points(&self) -> &[Site] {
        self.assignment.points()
    }

    /// `|D|`, equal to `|D°|`.
    pub fn cell_size(&self) -> usize {
        self.cell_d.len()
    }

    pub fn from_points(points: &[Site], side: u32, dim: usize, tie: TieBreak) -> Self {
        let assignment = voronoi_assign(points, side, dim, tie);
        let (cell_d, shift_s, cell_d_star) = cell_at_origin(&assignment);
        CellDecomposition {
            assignment,
            cell_d,
            shift_s,
            cell_d_star,
        }
    }
}

/// Full decomposition of a measure.
pub fn decompose(measure: &MeasureWindow, tie: TieBreak) -> Result<CellDecomposition> {
    let points = build_lattice_points(measure)?;
    Ok(CellDecomposition::from_points(&points, measure.side(), measure.dim(), tie))
}

/// Decomposition for the unit boxes `offset + i + [0,1)^d`.
pub fn decompose_offset(measure: &MeasureWindow, offset: &[f64], tie: TieBreak) -> Result<CellDecomposition> {
    let points = build_lattice_points_offset(measure, offset)?;
    Ok(CellDecomposition::from_points(&points, measure.side(), measure.dim(), tie))
}
