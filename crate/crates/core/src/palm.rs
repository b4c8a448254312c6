//! Passing between a stationary pair and its Palm version.
//!
//! Gridded measures only shift by whole cells, so every transform tracks the
//! continuous origin inside the cell at zero (see [`RootedSample`]). For
//! atom-only measures that offset is always zero and every step is exact.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{decompose_offset, CellDecomposition, Site, TieBreak};
use crate::measure::{torus_distance, Cuboid, WeightedSample};
use crate::preserving::RootedSample;
use crate::rng::{stream, SimRng};

/// Atoms closer than this to the origin count as sitting on it.
pub const ORIGIN_TOL: f64 = 1e-9;

/// Output of the forward construction.
#[derive(Clone, Debug)]
pub struct PalmRecord {
    pub sample: WeightedSample,
    /// Position of the new origin inside the unit box of its lattice point.
    pub t: Vec<f64>,
    /// Vector from the lattice point owning the old origin to the old origin.
    pub s: Vec<i64>,
    pub decomposition: CellDecomposition,
    /// Sub-cell offset of the new origin (zero for atom-only measures).
    pub root: Vec<f64>,
}

impl PalmRecord {
    pub fn rooted(&self) -> RootedSample {
        RootedSample {
            sample: self.sample.clone(),
            root: self.root.clone(),
        }
    }
}

/// Output of the inverse construction.
#[derive(Clone, Debug)]
pub struct InverseRecord {
    pub sample: WeightedSample,
    /// Uniform draw on `(0,1)^d`.
    pub t: Vec<f64>,
    /// Uniform draw on `D°`.
    pub s: Vec<i64>,
    /// `|D°|`.
    pub cell_size: usize,
    pub root: Vec<f64>,
}

impl InverseRecord {
    pub fn rooted(&self) -> RootedSample {
        RootedSample {
            sample: self.sample.clone(),
            root: self.root.clone(),
        }
    }
}

fn to_f64(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

/// Stationary to Palm, from a rooted sample.
pub fn palm_forward_rooted<R: Rng + ?Sized>(rooted: &RootedSample, rng: &mut R) -> Result<PalmRecord> {
    let measure = &rooted.sample.measure;
    let root = &rooted.root;
    let dec = decompose_offset(measure, root, TieBreak::Covariant)?;
    // unit box of the owning lattice point, in chart coordinates
    let lo: Vec<f64> = root.iter().zip(&dec.shift_s).map(|(r, s)| r - *s as f64).collect();
    let unit = Cuboid::cube(&lo, 1.0);
    let box_mass = measure.mass(&unit);
    let p = measure.sample_conditional(&unit, rng)?;
    let w = measure.side() as f64;
    let t: Vec<f64> = p
        .iter()
        .zip(&lo)
        .map(|(x, l)| (x - l).rem_euclid(w).min(1.0 - f64::EPSILON))
        .collect();
    // land on the sampled point itself so an atom ends exactly at the origin
    let moved = rooted.relocate(&p);
    let factor = box_mass / dec.cell_size() as f64;
    Ok(PalmRecord {
        sample: moved.sample.reweighted(factor)?,
        t,
        s: dec.shift_s.clone(),
        decomposition: dec,
        root: moved.root,
    })
}

/// Stationary to Palm. Gridded measures get a uniform origin inside cell zero.
pub fn palm_forward<R: Rng + ?Sized>(sample: &WeightedSample, rng: &mut R) -> Result<PalmRecord> {
    let rooted = RootedSample::jittered(sample.clone(), rng);
    palm_forward_rooted(&rooted, rng)
}

/// The origin carries mass: an atom at it, or positive density in the cell at zero.
pub fn root_supported(sample: &WeightedSample) -> bool {
    let m = &sample.measure;
    let zero = vec![0.0; m.dim()];
    let w = m.side() as f64;
    m.atoms().iter().any(|a| torus_distance(&a.loc, &zero, w) < ORIGIN_TOL)
        || m.density_at_origin().is_some_and(|z| z > 0.0)
}

/// Palm to stationary, from a rooted sample.
pub fn palm_inverse_rooted<R: Rng + ?Sized>(rooted: &RootedSample, rng: &mut R) -> Result<InverseRecord> {
    if !root_supported(&rooted.sample) {
        return Err(Error::OriginNotInSupport);
    }
    let measure = &rooted.sample.measure;
    let dim = measure.dim();
    let t: Vec<f64> = (0..dim)
        .map(|_| loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        })
        .collect();
    // unit boxes of θ_{-T} seen from the root sit at root - T + i
    let offset: Vec<f64> = rooted.root.iter().zip(&t).map(|(r, x)| r - x).collect();
    let box_mass = measure.mass(&Cuboid::cube(&offset, 1.0));
    if !(box_mass > 0.0) {
        return Err(Error::ZeroMassBox);
    }
    let dec = decompose_offset(measure, &offset, TieBreak::Covariant)?;
    let cell: &[Site] = &dec.cell_d_star;
    let pick = &cell[rng.random_range(0..cell.len())];
    let s: Vec<i64> = pick
        .iter()
        .map(|&c| {
            let w = measure.side() as i64;
            let r = c.rem_euclid(w);
            if 2 * r >= w {
                r - w
            } else {
                r
            }
        })
        .collect();
    let landing: Vec<f64> = offset.iter().zip(to_f64(&s)).map(|(o, k)| o + k).collect();
    let moved = rooted.relocate(&landing);
    let factor = cell.len() as f64 / box_mass;
    Ok(InverseRecord {
        sample: moved.sample.reweighted(factor)?,
        t,
        s,
        cell_size: cell.len(),
        root: moved.root,
    })
}

/// Palm to stationary. Gridded measures get a uniform origin inside cell zero.
pub fn palm_inverse<R: Rng + ?Sized>(sample: &WeightedSample, rng: &mut R) -> Result<InverseRecord> {
    let rooted = RootedSample::jittered(sample.clone(), rng);
    palm_inverse_rooted(&rooted, rng)
}

/// Multiply the weight by the density at the origin. No change of origin.
pub fn density_palm(sample: &WeightedSample) -> Result<WeightedSample> {
    if !sample.measure.atoms().is_empty() {
        return Err(Error::AtomicInput);
    }
    let z0 = sample.measure.density_at_origin().ok_or(Error::MissingDensity)?;
    if z0 == 0.0 {
        return Err(Error::DegenerateWeight);
    }
    if !(z0 > 0.0) {
        return Err(Error::NonpositiveDensity(0));
    }
    sample.clone().multiply_density(z0)
}

/// Divide the weight by the density at the origin; requires a strictly
/// positive density everywhere.
pub fn density_inverse(sample: &WeightedSample) -> Result<WeightedSample> {
    let g = sample.measure.density().ok_or(Error::MissingDensity)?;
    if let Some(i) = g.values().iter().position(|v| !(*v > 0.0)) {
        return Err(Error::NonpositiveDensity(i));
    }
    sample.clone().divide_density(g.values()[0])
}

/// Monte-Carlo estimate of `E[∫_B f(θ_t(X, ξ)) ξ(dt)] / λ(B)` over a
/// weighted stationary ensemble. Density cells are evaluated at their
/// centres, split by their overlap with `B`.
pub fn palm_expectation<F>(f: F, ensemble: &[WeightedSample], b: &Cuboid) -> Result<f64>
where
    F: Fn(&WeightedSample) -> f64 + Sync,
{
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let vol = b.volume();
    if !(vol > 0.0) {
        return Err(Error::InvalidParameter("box must have positive volume".into()));
    }
    let (num, den) = ensemble
        .par_iter()
        .map(|s| (s.weight() * campbell_sum(&f, s, b), s.weight()))
        .reduce(|| (0.0, 0.0), |a, c| (a.0 + c.0, a.1 + c.1));
    Ok(num / den / vol)
}

/// `∫_B f(θ_t ·) ξ(dt)` for one sample.
pub fn campbell_sum<F>(f: &F, sample: &WeightedSample, b: &Cuboid) -> f64
where
    F: Fn(&WeightedSample) -> f64,
{
    let m = &sample.measure;
    let w = m.side() as f64;
    let mut acc = 0.0;
    for a in m.atoms() {
        if b.contains(&a.loc, w) {
            acc += a.mass * f(&sample.shifted(&a.loc));
        }
    }
    if let Some(g) = m.density() {
        let h = 1.0 / g.res() as f64;
        let first: Vec<i64> = b.lo.iter().map(|x| (x / h).floor() as i64).collect();
        let last: Vec<i64> = b.hi.iter().map(|x| (x / h).ceil() as i64 - 1).collect();
        let mut cell = first.clone();
        loop {
            let lo: Vec<f64> = cell.iter().map(|&c| c as f64 * h).collect();
            let overlap: f64 = lo
                .iter()
                .zip(b.lo.iter().zip(&b.hi))
                .map(|(l, (bl, bh))| ((l + h).min(*bh) - l.max(*bl)).max(0.0))
                .product();
            if overlap > 0.0 {
                let centre: Vec<f64> = lo.iter().map(|l| l + h / 2.0).collect();
                let z = g.value_at(&centre.iter().map(|x| x.rem_euclid(w)).collect::<Vec<_>>());
                if z > 0.0 {
                    acc += z * overlap * f(&sample.shifted(&centre));
                }
            }
            let mut k = 0;
            loop {
                if k == cell.len() {
                    return acc;
                }
                cell[k] += 1;
                if cell[k] <= last[k] {
                    break;
                }
                cell[k] = first[k];
                k += 1;
            }
        }
    }
    acc
}

/// Apply a per-sample randomized transform across an ensemble in parallel.
/// Sample `i` uses stream `i` of `seed`, so results do not depend on the
/// thread count.
pub fn map_ensemble<T, F>(ensemble: &[WeightedSample], seed: u64, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(&WeightedSample, &mut SimRng) -> Result<T> + Sync,
{
    ensemble
        .par_iter()
        .enumerate()
        .map(|(i, s)| f(s, &mut stream(seed, i as u64)))
        .collect()
}

/// [`palm_forward`] over an ensemble.
pub fn forward_ensemble(ensemble: &[WeightedSample], seed: u64) -> Vec<Result<PalmRecord>> {
    map_ensemble(ensemble, seed, |s, rng| palm_forward(s, rng))
}

/// [`palm_inverse`] over an ensemble.
pub fn inverse_ensemble(ensemble: &[WeightedSample], seed: u64) -> Vec<Result<InverseRecord>> {
    map_ensemble(ensemble, seed, |s, rng| palm_inverse(s, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, Grid, MeasureWindow};
    use rand::SeedableRng;

    fn atoms(side: u32, locs: &[(f64, f64)]) -> WeightedSample {
        let list = locs.iter().map(|&(x, m)| Atom::new(vec![x], m)).collect();
        WeightedSample::unmarked(MeasureWindow::from_atoms(1, side, 1, list).unwrap())
    }

    fn rng() -> SimRng {
        SimRng::seed_from_u64(11)
    }

    #[test]
    fn forward_single_cell_example() {
        // N = {0, 3}: the origin's cell is {6, 7, 0, 1}
        let s = atoms(8, &[(0.5, 1.0), (3.5, 1.0)]);
        let rec = palm_forward(&s, &mut rng()).unwrap();
        assert_eq!(rec.s, vec![0]);
        assert_eq!(rec.t, vec![0.5]);
        assert_eq!(rec.decomposition.cell_size(), 4);
        assert_eq!(rec.sample.weight(), 0.25);
        assert_eq!(rec.sample.measure.atoms()[0].loc, vec![0.0]);
        let heavy = atoms(8, &[(0.5, 2.0), (3.5, 1.0)]);
        assert_eq!(palm_forward(&heavy, &mut rng()).unwrap().sample.weight(), 0.5);
    }

    #[test]
    fn forward_lone_atom_spans_the_torus() {
        let s = atoms(8, &[(0.5, 1.0)]);
        let rec = palm_forward(&s, &mut rng()).unwrap();
        assert_eq!(rec.sample.weight(), 1.0 / 8.0);
    }

    #[test]
    fn forward_moves_to_owner() {
        // origin owned by the point at 7
        let s = atoms(8, &[(7.25, 1.0), (3.5, 1.0)]);
        let rec = palm_forward(&s, &mut rng()).unwrap();
        assert_eq!(rec.s, vec![1]);
        assert_eq!(rec.t, vec![0.25]);
        assert!(root_supported(&rec.sample));
    }

    #[test]
    fn inverse_lone_atom() {
        let s = atoms(8, &[(0.0, 1.0)]);
        let mut r = rng();
        for _ in 0..20 {
            let rec = palm_inverse(&s, &mut r).unwrap();
            assert_eq!(rec.cell_size, 8);
            assert_eq!(rec.sample.weight(), 8.0);
            // the atom now sits at T - S
            let a = rec.sample.measure.atoms()[0].loc[0];
            let expect = (rec.t[0] - rec.s[0] as f64).rem_euclid(8.0);
            assert!((a - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_full_lattice() {
        let locs: Vec<(f64, f64)> = (0..8).map(|i| (i as f64, 1.0)).collect();
        let s = atoms(8, &locs);
        let rec = palm_inverse(&s, &mut rng()).unwrap();
        assert_eq!(rec.cell_size, 1);
        assert_eq!(rec.s, vec![0]);
        assert_eq!(rec.sample.weight(), 1.0);
    }

    #[test]
    fn inverse_requires_origin_mass() {
        let s = atoms(8, &[(0.5, 1.0)]);
        assert!(matches!(palm_inverse(&s, &mut rng()), Err(Error::OriginNotInSupport)));
    }

    #[test]
    fn density_examples() {
        let m = MeasureWindow::from_density(Grid::constant(2, 4, 2, 3.0)).unwrap();
        let s = WeightedSample::unmarked(m);
        let p = density_palm(&s).unwrap();
        assert_eq!(p.weight(), 3.0);
        let back = density_inverse(&p).unwrap();
        assert_eq!(back, s);

        let mut vals = vec![1.0; 4];
        vals[0] = 0.0;
        let z = WeightedSample::unmarked(MeasureWindow::from_density(Grid::new(1, 4, 1, vals).unwrap()).unwrap());
        assert!(matches!(density_palm(&z), Err(Error::DegenerateWeight)));
        assert!(matches!(density_inverse(&z), Err(Error::NonpositiveDensity(0))));
    }

    #[test]
    fn density_round_trip_is_bit_exact() {
        let mut r = rng();
        for _ in 0..500 {
            let vals: Vec<f64> = (0..8).map(|_| 0.01 + 20.0 * r.random::<f64>()).collect();
            let m = MeasureWindow::from_density(Grid::new(1, 8, 1, vals).unwrap()).unwrap();
            let w = 0.1 + 10.0 * r.random::<f64>();
            let s = WeightedSample::new(crate::measure::MarkField::blank(1, 8, 1), m, w).unwrap();
            let back = density_inverse(&density_palm(&s).unwrap()).unwrap();
            assert_eq!(back.weight().to_bits(), w.to_bits());
        }
    }

    #[test]
    fn palm_expectation_examples() {
        let s = atoms(8, &[(0.5, 1.0), (3.5, 2.0)]);
        let b = Cuboid::new(vec![0.0], vec![4.0]);
        let e = palm_expectation(|_| 1.0, std::slice::from_ref(&s), &b).unwrap();
        assert_eq!(e, 3.0 / 4.0);
        let null = WeightedSample::unmarked(MeasureWindow::empty(1, 8, 1));
        assert_eq!(palm_expectation(|_| 1.0, &[null], &b).unwrap(), 0.0);
        assert!(matches!(palm_expectation(|_| 1.0, &[], &b), Err(Error::EmptyEnsemble)));
        // the Palm view from each atom has mass at the origin
        let f = |x: &WeightedSample| if root_supported(x) { 1.0 } else { 0.0 };
        assert_eq!(palm_expectation(f, &[s], &b).unwrap(), 3.0 / 4.0);
    }

    #[test]
    fn grid_forward_lands_on_mass() {
        let mut vals = vec![0.0; 32];
        vals[13] = 2.0;
        vals[14] = 1.0;
        let m = MeasureWindow::from_density(Grid::new(1, 8, 4, vals).unwrap()).unwrap();
        let s = WeightedSample::unmarked(m);
        let mut r = rng();
        for _ in 0..50 {
            let rec = palm_forward(&s, &mut r).unwrap();
            assert!(root_supported(&rec.sample));
            assert!(rec.root[0] >= 0.0 && rec.root[0] < 0.25);
            let back = palm_inverse_rooted(&rec.rooted(), &mut r).unwrap();
            assert!(back.sample.weight() > 0.0);
        }
    }

    #[test]
    fn ensemble_maps_are_deterministic() {
        let ens: Vec<WeightedSample> = (0..16).map(|i| atoms(8, &[(0.3 + i as f64 * 0.4, 1.0)])).collect();
        let a: Vec<Vec<f64>> = forward_ensemble(&ens, 5).into_iter().map(|r| r.unwrap().t).collect();
        let b: Vec<Vec<f64>> = forward_ensemble(&ens, 5).into_iter().map(|r| r.unwrap().t).collect();
        assert_eq!(a, b);
    }
}
