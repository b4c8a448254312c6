//! Weighted Monte-Carlo checks of mass-stationarity, shift invariance and
//! the round trip through the Palm version.

pub mod functionals;
pub mod report;
pub mod two_sample;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::lattice::{decompose_offset, TieBreak};
use crate::measure::{axis_segments, for_each_piece, torus_distance, Cuboid, MeasureWindow, WeightedSample};
use crate::palm::{palm_forward_rooted, palm_inverse_rooted, PalmRecord};
use crate::preserving::{example1_shift_sample, line_shift_sample, Background, PsiOptions, RootedSample};
use crate::rng::{derive_seed, stream};

pub use functionals::{Functional, FunctionalSet, View};
pub use report::{TestRecord, TestReport, TestRow, Verdict};
pub use two_sample::{
    bonferroni, energy_distance_1d, ks_p_value, ks_statistic, unit_bin, weighted_chi_square, weighted_paired_energy,
    weighted_paired_two_sample, weighted_two_sample, ChiSquareResult, PermutationResult,
};

/// Settings shared by all reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub level: f64,
    pub n_perm: usize,
    pub seed: u64,
    /// Pairs entering the quadratic-cost joint test.
    pub joint_cap: usize,
    /// Bins for probability-integral-transform checks.
    pub bins: usize,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            level: 0.05,
            n_perm: 999,
            seed: 0,
            joint_cap: 1000,
            bins: 10,
        }
    }
}

impl TestConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Turn a permutation result into a Bonferroni-adjusted row.
fn perm_row(group: &str, name: &str, r: PermutationResult, m: usize, cfg: &TestConfig, n: usize) -> TestRow {
    let adjusted = bonferroni(r.p_value, m);
    TestRow {
        group: group.to_string(),
        name: name.to_string(),
        statistic: r.statistic,
        p_value: r.p_value,
        adjusted_p_value: adjusted,
        threshold: r.threshold,
        verdict: Verdict::from_pass(adjusted > cfg.level),
        n,
        seed: cfg.seed,
    }
}

fn chi_row(group: &str, name: &str, r: ChiSquareResult, m: usize, cfg: &TestConfig, n: usize) -> TestRow {
    let adjusted = bonferroni(r.p_value, m);
    let threshold = ChiSquared::new(r.dof as f64)
        .map(|d| d.inverse_cdf(1.0 - cfg.level / m as f64))
        .unwrap_or(f64::INFINITY);
    TestRow {
        group: group.to_string(),
        name: name.to_string(),
        statistic: r.statistic,
        p_value: r.p_value,
        adjusted_p_value: adjusted,
        threshold,
        verdict: Verdict::from_pass(adjusted > cfg.level),
        n,
        seed: cfg.seed,
    }
}

/// One draw of the two sides of the mass-stationarity identity.
#[derive(Clone, Debug, PartialEq)]
pub struct ExchangePair {
    /// Functionals of the sample re-rooted at `V`.
    pub left: Vec<f64>,
    /// Functionals of the sample itself.
    pub right: Vec<f64>,
    pub u: Vec<f64>,
    /// `V + U`, in `[0, n)^d`.
    pub vu: Vec<f64>,
    pub weight: f64,
}

impl ExchangePair {
    /// `(θ_V(X, ξ), V + U)` as a vector.
    pub fn left_tuple(&self) -> Vec<f64> {
        self.left.iter().chain(&self.vu).copied().collect()
    }

    /// `((X, ξ), U)` as a vector.
    pub fn right_tuple(&self) -> Vec<f64> {
        self.right.iter().chain(&self.u).copied().collect()
    }
}

/// Retries of `U` when `C - U` carries no mass.
pub const PAIR_RETRIES: usize = 64;

/// Draw `U` uniform on `C = [0, n)^d` and `V` from `ξ(· | C - U)`, and
/// evaluate the functionals on both sides.
pub fn exchange_pair_sample<R: Rng + ?Sized>(
    rooted: &RootedSample,
    n: u32,
    fset: &FunctionalSet,
    rng: &mut R,
) -> Result<ExchangePair> {
    let m = &rooted.sample.measure;
    let dim = m.dim();
    let w = m.side() as f64;
    let nf = n as f64;
    for _ in 0..PAIR_RETRIES {
        let u: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * nf).collect();
        let lo: Vec<f64> = rooted.root.iter().zip(&u).map(|(r, x)| r - x).collect();
        let region = Cuboid::cube(&lo, nf);
        let p = match m.sample_conditional(&region, rng) {
            Ok(p) => p,
            Err(Error::ZeroMassBox) => continue,
            Err(e) => return Err(e),
        };
        let vu: Vec<f64> = p
            .iter()
            .zip(&lo)
            .map(|(x, l)| (x - l).rem_euclid(w).min(nf * (1.0 - f64::EPSILON)))
            .collect();
        let right = fset.eval(&View::new(rooted));
        let moved = rooted.relocate(&p);
        let left = fset.eval(&View::new(&moved));
        return Ok(ExchangePair {
            left,
            right,
            u,
            vu,
            weight: rooted.sample.weight(),
        });
    }
    Err(Error::ZeroMassBox)
}

/// Eq. pairs for a whole ensemble; sample `i` uses stream `i` of `seed`.
pub fn exchange_pairs(ensemble: &[WeightedSample], n: u32, fset: &FunctionalSet, seed: u64) -> Result<Vec<ExchangePair>> {
    ensemble
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = stream(seed, i as u64);
            let rooted = RootedSample::jittered(s.clone(), &mut rng);
            exchange_pair_sample(&rooted, n, fset, &mut rng)
        })
        .collect()
}

/// Test the mass-stationarity identity for `C = [0, n)^d`, `n` in `n_list`,
/// per functional, plus the joint exchange symmetry.
pub fn mass_stationarity_report(
    ensemble: &[WeightedSample],
    n_list: &[u32],
    fset: &FunctionalSet,
    cfg: &TestConfig,
) -> Result<TestReport> {
    let first = ensemble.first().ok_or(Error::EmptyEnsemble)?;
    if ensemble.len() < 2 {
        return Err(Error::DegenerateSample);
    }
    let dim = first.dim();
    let mut names = fset.names();
    names.extend((0..dim).map(|k| format!("aux_{k}")));
    let per_n = names.len() + 1;
    let m = per_n * n_list.len();
    let alpha = cfg.level / m as f64;
    let mut rows = Vec::with_capacity(m);
    for (ni, &n) in n_list.iter().enumerate() {
        let group = format!("n={n}");
        let seed = derive_seed(cfg.seed, 100 + ni as u64);
        let pairs = exchange_pairs(ensemble, n, fset, seed)?;
        let w: Vec<f64> = pairs.iter().map(|p| p.weight).collect();
        let left: Vec<Vec<f64>> = pairs.iter().map(ExchangePair::left_tuple).collect();
        let right: Vec<Vec<f64>> = pairs.iter().map(ExchangePair::right_tuple).collect();
        for (k, name) in names.iter().enumerate() {
            let a: Vec<f64> = left.iter().map(|v| v[k]).collect();
            let b: Vec<f64> = right.iter().map(|v| v[k]).collect();
            let r = weighted_paired_two_sample(&a, &b, &w, cfg.n_perm, alpha, derive_seed(seed, k as u64))?;
            rows.push(perm_row(&group, name, r, m, cfg, pairs.len()));
        }
        // exchange symmetry: (θ_V, V+U, U) against ((X, ξ), U, V+U)
        let take = pairs.len().min(cfg.joint_cap);
        let ja: Vec<Vec<f64>> = pairs[..take]
            .iter()
            .map(|p| p.left.iter().chain(&p.vu).chain(&p.u).copied().collect())
            .collect();
        let jb: Vec<Vec<f64>> = pairs[..take]
            .iter()
            .map(|p| p.right.iter().chain(&p.u).chain(&p.vu).copied().collect())
            .collect();
        let r = weighted_paired_energy(&ja, &jb, &w[..take], cfg.n_perm, alpha, derive_seed(seed, 0x10))?;
        rows.push(perm_row(&group, "exchange_symmetry", r, m, cfg, take));
    }
    Ok(TestReport::new(
        "mass_stationarity",
        cfg.level,
        cfg.seed,
        vec![ensemble.len()],
        rows,
        "consistent with mass-stationarity",
    ))
}

/// Which preserving shift to apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ShiftMode {
    /// Move along `direction` until the density has integrated to `r`.
    Line { direction: Vec<f64>, laps: u32 },
    /// Tile-wise rotation against a fresh background of `n`-boxes; with
    /// `extend`, first pass to `ξ ⊗ λ₁`.
    Example1 { n: u32, extend: bool, subdivide: u32, bits: u32 },
}

/// Compare functional laws before and after a preserving shift, for each
/// shift parameter in `r_grid`.
pub fn shift_invariance_report(
    ensemble: &[WeightedSample],
    mode: &ShiftMode,
    r_grid: &[f64],
    cfg: &TestConfig,
) -> Result<TestReport> {
    let first = ensemble.first().ok_or(Error::EmptyEnsemble)?;
    let extended: Vec<WeightedSample>;
    let ens: &[WeightedSample] = match mode {
        ShiftMode::Example1 { extend: true, .. } => {
            extended = ensemble.par_iter().map(WeightedSample::product_extended).collect();
            &extended
        }
        _ => ensemble,
    };
    let dim = ens[0].dim();
    let _ = first;
    let fset = match mode {
        ShiftMode::Line { .. } => FunctionalSet::standard().with_root(dim),
        ShiftMode::Example1 { .. } => FunctionalSet::standard().with_root(dim).with_background(dim),
    };
    let names = fset.names();
    let m = names.len() * r_grid.len();
    let alpha = cfg.level / m as f64;
    let mut rows = Vec::with_capacity(m);
    for (ri, &r) in r_grid.iter().enumerate() {
        let group = format!("r={r}");
        let seed = derive_seed(cfg.seed, 200 + ri as u64);
        let evaluated: Vec<(Vec<f64>, Vec<f64>, f64)> = ens
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let mut rng = stream(seed, i as u64);
                let rooted = RootedSample::jittered(s.clone(), &mut rng);
                match mode {
                    ShiftMode::Line { direction, laps } => {
                        let moved = line_shift_sample(&rooted, direction, r, *laps)?;
                        Ok((
                            fset.eval(&View::new(&rooted)),
                            fset.eval(&View::new(&moved)),
                            s.weight(),
                        ))
                    }
                    ShiftMode::Example1 { n, subdivide, bits, .. } => {
                        let bg = Background::draw(dim, *n, &mut rng);
                        let opts = PsiOptions {
                            subdivide: *subdivide,
                            bits: *bits,
                        };
                        let (moved, new_bg) = example1_shift_sample(&rooted, &bg, r, opts)?;
                        Ok((
                            fset.eval(&View::new(&rooted).with_background(bg.y0())),
                            fset.eval(&View::new(&moved).with_background(new_bg.y0())),
                            s.weight(),
                        ))
                    }
                }
            })
            .collect::<Result<_>>()?;
        let w: Vec<f64> = evaluated.iter().map(|e| e.2).collect();
        for (k, name) in names.iter().enumerate() {
            let a: Vec<f64> = evaluated.iter().map(|e| e.0[k]).collect();
            let b: Vec<f64> = evaluated.iter().map(|e| e.1[k]).collect();
            let res = weighted_two_sample(&a, &w, &b, &w, cfg.n_perm, alpha, derive_seed(seed, k as u64))?;
            rows.push(perm_row(&group, name, res, m, cfg, evaluated.len()));
        }
    }
    Ok(TestReport::new(
        "shift_invariance",
        cfg.level,
        cfg.seed,
        vec![ens.len()],
        rows,
        "consistent with invariance under the preserving shifts",
    ))
}

/// Functionals of every rooted sample, with weights.
fn evaluate(rooted: &[RootedSample], fset: &FunctionalSet) -> (Vec<Vec<f64>>, Vec<f64>) {
    rooted
        .par_iter()
        .map(|r| (fset.eval(&View::new(r)), r.sample.weight()))
        .unzip()
}

/// Unpaired per-functional comparison of two weighted ensembles.
pub fn compare_ensembles(
    a: &[RootedSample],
    b: &[RootedSample],
    fset: &FunctionalSet,
    cfg: &TestConfig,
    extra_tests: usize,
    group: &str,
) -> Result<Vec<TestRow>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let names = fset.names();
    let m = names.len() + extra_tests;
    let alpha = cfg.level / m as f64;
    let (va, wa) = evaluate(a, fset);
    let (vb, wb) = evaluate(b, fset);
    names
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let xa: Vec<f64> = va.iter().map(|v| v[k]).collect();
            let xb: Vec<f64> = vb.iter().map(|v| v[k]).collect();
            let r = weighted_two_sample(&xa, &wa, &xb, &wb, cfg.n_perm, alpha, derive_seed(cfg.seed, 300 + k as u64))?;
            Ok(perm_row(group, name, r, m, cfg, a.len() + b.len()))
        })
        .collect()
}

/// Forward construction over a stationary ensemble, keeping the sub-cell
/// origin of gridded samples.
pub fn forward_records(ensemble: &[WeightedSample], seed: u64) -> Result<Vec<PalmRecord>> {
    ensemble
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = stream(seed, i as u64);
            let rooted = RootedSample::jittered(s.clone(), &mut rng);
            palm_forward_rooted(&rooted, &mut rng)
        })
        .collect()
}

/// Compare the forward construction applied to `stationary` with an
/// independently generated Palm ensemble.
pub fn palm_match_report(
    stationary: &[WeightedSample],
    palm: &[WeightedSample],
    fset: &FunctionalSet,
    cfg: &TestConfig,
) -> Result<TestReport> {
    let records = forward_records(stationary, derive_seed(cfg.seed, 1))?;
    let a: Vec<RootedSample> = records.iter().map(PalmRecord::rooted).collect();
    let b: Vec<RootedSample> = palm.iter().map(|s| RootedSample::exact(s.clone())).collect();
    let rows = compare_ensembles(&a, &b, fset, cfg, 0, "palm")?;
    Ok(TestReport::new(
        "palm_match",
        cfg.level,
        cfg.seed,
        vec![stationary.len(), palm.len()],
        rows,
        "forward construction consistent with the reference Palm ensemble",
    ))
}

/// Position of `point` within `ξ(· | [lo, lo+1)^d)` as a number in `[0, 1)`:
/// atoms come first in lexicographic order, then density pieces in grid
/// order; inside a density piece the position along axis 0 is used, and
/// inside an atom a uniform draw.
pub fn box_pit<R: Rng + ?Sized>(measure: &MeasureWindow, lo: &[f64], point: &[f64], rng: &mut R) -> Option<f64> {
    let w = measure.side() as f64;
    let unit = Cuboid::cube(lo, 1.0);
    let total = measure.mass(&unit);
    if !(total > 0.0) {
        return None;
    }
    let mut atoms: Vec<(Vec<f64>, f64, bool)> = measure
        .atoms()
        .iter()
        .filter(|a| unit.contains(&a.loc, w))
        .map(|a| {
            let rel: Vec<f64> = a.loc.iter().zip(lo).map(|(x, l)| (x - l).rem_euclid(w)).collect();
            (rel, a.mass, torus_distance(&a.loc, point, w) < 1e-9)
        })
        .collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut before = 0.0;
    for (_, mass, hit) in &atoms {
        if *hit {
            return Some((before + rng.random::<f64>() * mass) / total);
        }
        before += mass;
    }
    let g = measure.density()?;
    let rel: Vec<f64> = point.iter().zip(lo).map(|(x, l)| l + (x - l).rem_euclid(w)).collect();
    let axes: Vec<_> = lo
        .iter()
        .map(|&l| axis_segments(l, l + 1.0, measure.side(), measure.res()))
        .collect();
    let mut found = None;
    let mut cell = vec![0usize; lo.len()];
    for_each_piece(&axes, |segs| {
        if found.is_some() {
            return;
        }
        let mut vol = 1.0;
        for (c, s) in cell.iter_mut().zip(segs) {
            *c = s.cell;
            vol *= s.len;
        }
        let mass = g.values()[g.index(&cell)] * vol;
        let inside = segs.iter().zip(&rel).all(|(s, x)| *x >= s.start && *x < s.start + s.len);
        if inside {
            let rho = ((rel[0] - segs[0].start) / segs[0].len).clamp(0.0, 1.0);
            found = Some((before + rho * mass) / total);
        } else {
            before += mass;
        }
    });
    found.map(|v| v.clamp(0.0, 1.0 - f64::EPSILON))
}

/// Forward then inverse; compare the reconstruction with the original
/// ensemble, check that the reconstructed `T` follows
/// `(θ_{-S} ξ)(· | [0,1)^d)`, and that the mean weight is one.
pub fn roundtrip_report(ensemble: &[WeightedSample], fset: &FunctionalSet, cfg: &TestConfig) -> Result<TestReport> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let records = forward_records(ensemble, derive_seed(cfg.seed, 1))?;
    let seed_inv = derive_seed(cfg.seed, 2);
    let back: Vec<(RootedSample, Vec<f64>, Vec<i64>)> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| {
            let mut rng = stream(seed_inv, i as u64);
            let inv = palm_inverse_rooted(&rec.rooted(), &mut rng)?;
            Ok((inv.rooted(), inv.t, inv.s))
        })
        .collect::<Result<_>>()?;
    let seed_orig = derive_seed(cfg.seed, 3);
    let original: Vec<RootedSample> = ensemble
        .iter()
        .enumerate()
        .map(|(i, s)| RootedSample::jittered(s.clone(), &mut stream(seed_orig, i as u64)))
        .collect();
    let rebuilt: Vec<RootedSample> = back.iter().map(|b| b.0.clone()).collect();
    let extra = 2;
    let m = fset.len() + extra;
    let mut rows = compare_ensembles(&rebuilt, &original, fset, cfg, extra, "laws")?;

    // conditional law of T on the reconstructed side
    let seed_pit = derive_seed(cfg.seed, 4);
    let mut mismatched = 0usize;
    let mut bins = Vec::with_capacity(back.len());
    let mut weights = Vec::with_capacity(back.len());
    for (i, (rooted, t, s)) in back.iter().enumerate() {
        let m_ = &rooted.sample.measure;
        let dec = decompose_offset(m_, &rooted.root, TieBreak::Covariant)?;
        if &dec.shift_s != s {
            mismatched += 1;
        }
        let lo: Vec<f64> = rooted.root.iter().zip(&dec.shift_s).map(|(r, k)| r - *k as f64).collect();
        let point: Vec<f64> = lo.iter().zip(t).map(|(l, x)| l + x).collect();
        let mut rng = stream(seed_pit, i as u64);
        if let Some(u) = box_pit(m_, &lo, &point, &mut rng) {
            bins.push(unit_bin(u, cfg.bins));
            weights.push(rooted.sample.weight());
        } else {
            mismatched += 1;
        }
    }
    let probs = vec![1.0 / cfg.bins as f64; cfg.bins];
    let chi = weighted_chi_square(&bins, &weights, &probs)?;
    rows.push(chi_row("conditional", "t_law", chi, m, cfg, bins.len()));

    // mean weight against one
    let ws: Vec<f64> = rebuilt.iter().map(|r| r.sample.weight()).collect();
    let n = ws.len() as f64;
    let mean = ws.iter().sum::<f64>() / n;
    let sd = (ws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
    let z = if sd > 0.0 { (mean - 1.0) / (sd / n.sqrt()) } else { 0.0 };
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = 2.0 * normal.sf(z.abs());
    let adjusted = bonferroni(p, m);
    rows.push(TestRow {
        group: "weights".into(),
        name: "mean_weight".into(),
        statistic: mean,
        p_value: p,
        adjusted_p_value: adjusted,
        threshold: normal.inverse_cdf(1.0 - cfg.level / (2.0 * m as f64)),
        verdict: Verdict::from_pass(adjusted > cfg.level),
        n: ws.len(),
        seed: cfg.seed,
    });
    let mut report = TestReport::new(
        "roundtrip",
        cfg.level,
        cfg.seed,
        vec![ensemble.len()],
        rows,
        "reconstruction consistent with the original stationary ensemble",
    );
    report.notes.push(format!("mean weight {mean:.6} (z = {z:.3})"));
    if mismatched > 0 {
        report
            .notes
            .push(format!("{mismatched} reconstructed samples disagree with their recorded lattice shift"));
    }
    Ok(report)
}

/// Conditional laws on the forward output: `T` uniform on `[0,1)^d`, and
/// `S` uniform on `D°`.
pub fn forward_law_report(records: &[PalmRecord], cfg: &TestConfig) -> Result<TestReport> {
    if records.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let dim = records[0].t.len();
    let per_axis = 4usize;
    let cells = per_axis.pow(dim as u32);
    let mut rng = stream(derive_seed(cfg.seed, 5), 0);
    let weights: Vec<f64> = records.iter().map(|r| r.sample.weight()).collect();
    let t_bins: Vec<usize> = records
        .iter()
        .map(|r| r.t.iter().rev().fold(0usize, |acc, x| acc * per_axis + unit_bin(*x, per_axis)))
        .collect();
    let s_bins: Vec<usize> = records
        .iter()
        .map(|r| {
            let w = r.sample.measure.side() as i64;
            let target: Vec<i64> = r.s.iter().map(|c| c.rem_euclid(w)).collect();
            let cell = &r.decomposition.cell_d_star;
            let pos = cell.iter().position(|c| *c == target).unwrap_or(0);
            let u = (pos as f64 + rng.random::<f64>()) / cell.len() as f64;
            unit_bin(u, cfg.bins)
        })
        .collect();
    let m = 2;
    let t = weighted_chi_square(&t_bins, &weights, &vec![1.0 / cells as f64; cells])?;
    let s = weighted_chi_square(&s_bins, &weights, &vec![1.0 / cfg.bins as f64; cfg.bins])?;
    let rows = vec![
        chi_row("conditional", "t_uniform", t, m, cfg, records.len()),
        chi_row("conditional", "s_uniform", s, m, cfg, records.len()),
    ];
    Ok(TestReport::new(
        "forward_laws",
        cfg.level,
        cfg.seed,
        vec![records.len()],
        rows,
        "conditional laws of T and S consistent with uniform",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate_ensemble, GeneratorKind, GeneratorSpec};
    use crate::measure::{Atom, Grid, MeasureWindow};
    use crate::rng::SimRng;
    use rand::SeedableRng;

    #[test]
    fn lone_origin_atom_gives_identical_sides() {
        let m = MeasureWindow::from_atoms(1, 8, 1, vec![Atom::new(vec![0.0], 1.0)]).unwrap();
        let r = RootedSample::exact(WeightedSample::unmarked(m));
        let mut rng = SimRng::seed_from_u64(0);
        for _ in 0..20 {
            let p = exchange_pair_sample(&r, 1, &FunctionalSet::standard(), &mut rng).unwrap();
            assert_eq!(p.left, p.right);
            assert_eq!(p.vu, p.u);
        }
    }

    #[test]
    fn pit_orders_atoms_then_cells() {
        let mut m = MeasureWindow::from_atoms(1, 4, 2, vec![Atom::new(vec![0.25], 1.0)]).unwrap();
        m.set_density(Grid::constant(1, 4, 2, 2.0)).unwrap();
        let mut rng = SimRng::seed_from_u64(0);
        let u = box_pit(&m, &[0.0], &[0.25], &mut rng).unwrap();
        assert!(u < 0.5);
        // total 3: atom 1, then cells [0,.5) and [.5,1) with 1 each
        let v = box_pit(&m, &[0.0], &[0.75], &mut rng).unwrap();
        assert!((v - (1.0 + 1.0 + 0.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reports_are_deterministic() {
        let spec = GeneratorSpec::new(GeneratorKind::PalmPoisson, 1.0, 1, 8, 1);
        let ens = generate_ensemble(&spec, 200, 1).unwrap();
        let cfg = TestConfig {
            n_perm: 49,
            joint_cap: 100,
            ..TestConfig::default()
        };
        let a = mass_stationarity_report(&ens, &[1], &FunctionalSet::standard(), &cfg).unwrap();
        let b = mass_stationarity_report(&ens, &[1], &FunctionalSet::standard(), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.rows.iter().all(|r| (0.0..=1.0).contains(&r.p_value)));
    }

    #[test]
    fn single_sample_roundtrip_is_degenerate() {
        let spec = GeneratorSpec::new(GeneratorKind::Poisson, 1.0, 1, 8, 1);
        let ens = generate_ensemble(&spec, 1, 1).unwrap();
        let err = roundtrip_report(&ens, &FunctionalSet::standard(), &TestConfig::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateSample), "{err}");
    }

    #[test]
    fn zero_rotation_leaves_functionals_unchanged() {
        let spec = GeneratorSpec::new(GeneratorKind::PalmPoisson, 1.0, 1, 8, 4);
        let ens = generate_ensemble(&spec, 30, 2).unwrap();
        let mode = ShiftMode::Example1 {
            n: 1,
            extend: true,
            subdivide: 0,
            bits: 48,
        };
        let cfg = TestConfig {
            n_perm: 19,
            ..TestConfig::default()
        };
        let rep = shift_invariance_report(&ens, &mode, &[0.0], &cfg).unwrap();
        for row in &rep.rows {
            assert!(row.statistic < 1e-5, "{}: {}", row.name, row.statistic);
        }
    }
}
