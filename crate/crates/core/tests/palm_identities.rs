//! Identities linking a stationary ensemble to its Palm version.

use palm_core::generators::{generate_ensemble, GeneratorKind, GeneratorSpec};
use palm_core::lattice::{decompose, TieBreak};
use palm_core::measure::{Cuboid, WeightedSample};
use palm_core::palm::{campbell_sum, palm_forward_rooted};
use palm_core::preserving::RootedSample;
use palm_core::rng::stream;
use palm_core::stats::{forward_records, forward_law_report, TestConfig};

fn poisson(dim: usize, n: usize, seed: u64) -> Vec<WeightedSample> {
    generate_ensemble(&GeneratorSpec::new(GeneratorKind::Poisson, 1.0, dim, 6, 1), n, seed).unwrap()
}

/// Mass of `[0, 2)^d` seen from the origin.
fn near_mass(s: &WeightedSample) -> f64 {
    s.measure.mass(&Cuboid::origin_cube(s.measure.dim(), 2.0))
}

/// Per sample: the forward side restricted to `S = i, T ∈ B`, minus the
/// cell side `1{i ∈ D°} / |D| ∫_B f(θ_t ξ) ξ(dt)` taken where the origin
/// owns itself. Both have the same mean; for `i = 0` they agree sample by
/// sample.
fn cell_identity_sides(s: &WeightedSample, i: &[i64], b: &Cuboid) -> (f64, f64) {
    let dec = decompose(&s.measure, TieBreak::Covariant).unwrap();
    let side = s.measure.side() as i64;
    let size = dec.cell_size() as f64;
    let left = if dec.shift_s == i {
        let lo: Vec<f64> = i.iter().map(|&x| -(x as f64)).collect();
        campbell_sum(&near_mass, s, &b.translated(&lo)) / size
    } else {
        0.0
    };
    let i_mod: Vec<i64> = i.iter().map(|x| x.rem_euclid(side)).collect();
    let owns_itself = dec.shift_s.iter().all(|&x| x == 0);
    let right = if owns_itself && dec.cell_d_star.contains(&i_mod) {
        campbell_sum(&near_mass, s, b) / size
    } else {
        0.0
    };
    (left, right)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

#[test]
fn cell_identity_holds_on_poisson() {
    for (dim, shifts) in [(1usize, vec![vec![0i64], vec![1], vec![-1], vec![2]]), (2, vec![vec![0, 0], vec![1, 0], vec![-1, 1]])] {
        let ens = poisson(dim, 20_000, 5 + dim as u64);
        let b = Cuboid::new(vec![0.0; dim], vec![0.5; dim]);
        for i in &shifts {
            let sides: Vec<(f64, f64)> = ens.iter().map(|s| cell_identity_sides(s, i, &b)).collect();
            assert!(sides.iter().any(|p| p.0 > 0.0) && sides.iter().any(|p| p.1 > 0.0), "dim {dim} i {i:?}: a side vanishes");
            let gaps: Vec<f64> = sides.iter().map(|(l, r)| l - r).collect();
            let (m, se) = mean_and_se(&gaps);
            assert!(m.abs() <= 4.0 * se + 1e-12, "dim {dim} i {i:?}: gap {m} se {se}");
        }
    }
}

#[test]
fn forward_weight_matches_box_mass_over_cell_size() {
    let ens = poisson(2, 200, 3);
    for (k, s) in ens.iter().enumerate() {
        let rec = palm_forward_rooted(&RootedSample::exact(s.clone()), &mut stream(1, k as u64)).unwrap();
        let dec = &rec.decomposition;
        let lo: Vec<f64> = dec.shift_s.iter().map(|&x| -(x as f64)).collect();
        let expect = s.measure.mass(&Cuboid::cube(&lo, 1.0)) / dec.cell_size() as f64;
        assert!((rec.sample.weight() - expect).abs() < 1e-12);
        assert!(rec.t.iter().all(|t| (0.0..1.0).contains(t)));
    }
}

#[test]
fn conditional_laws_of_t_and_s_on_poisson() {
    let ens = poisson(1, 3_000, 11);
    let recs = forward_records(&ens, 12).unwrap();
    let rep = forward_law_report(&recs, &TestConfig::default().with_seed(13)).unwrap();
    assert!(rep.passed(), "{}", rep.to_key_value());
}
