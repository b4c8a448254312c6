use palm_core::generators::{generate, GeneratorKind, GeneratorSpec};
use palm_core::io::{read_ensemble, write_ensemble};
use palm_core::measure::{Atom, MeasureWindow, WeightedSample};
use palm_core::palm::{density_inverse, density_palm, palm_forward_rooted, palm_inverse_rooted, root_supported};
use palm_core::preserving::RootedSample;
use palm_core::rng::stream;
use proptest::prelude::*;

fn atoms(dim: usize) -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    prop::collection::vec((prop::collection::vec(0.0..6.0f64, dim), 0.1..3.0f64), 1..12)
}

fn sample(dim: usize, a: Vec<(Vec<f64>, f64)>) -> WeightedSample {
    let atoms = a.into_iter().map(|(x, m)| Atom::new(x, m)).collect();
    WeightedSample::unmarked(MeasureWindow::from_atoms(dim, 6, 1, atoms).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_puts_mass_at_the_origin(a in atoms(2), seed in any::<u64>()) {
        let s = sample(2, a);
        let total = s.measure.total_mass();
        let rec = palm_forward_rooted(&RootedSample::exact(s), &mut stream(seed, 0)).unwrap();
        prop_assert!(root_supported(&rec.sample));
        prop_assert!((rec.sample.measure.total_mass() - total).abs() < 1e-9 * total.max(1.0));
        prop_assert!(rec.sample.weight() > 0.0);
    }

    #[test]
    fn inverse_keeps_total_mass_and_a_valid_cell_draw(a in atoms(1), seed in any::<u64>()) {
        let s = sample(1, a);
        let palm = palm_forward_rooted(&RootedSample::exact(s), &mut stream(seed, 1)).unwrap().rooted();
        let inv = palm_inverse_rooted(&palm, &mut stream(seed, 2)).unwrap();
        prop_assert!((inv.sample.measure.total_mass() - palm.sample.measure.total_mass()).abs() < 1e-9);
        prop_assert!(inv.cell_size >= 1);
        prop_assert!(inv.t.iter().all(|t| *t > 0.0 && *t < 1.0));
    }

    #[test]
    fn density_palm_then_inverse_is_identity(seed in any::<u64>(), dim in 1usize..3) {
        let spec = GeneratorSpec::new(GeneratorKind::ShotNoiseDensity, 1.0, dim, 4, 2);
        let s = generate(&spec, &mut stream(seed, 0)).unwrap();
        let back = density_inverse(&density_palm(&s).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn files_read_back_exactly(a in atoms(3), root in prop::collection::vec(0.0..1.0f64, 3)) {
        let ens = vec![RootedSample { sample: sample(3, a), root }];
        let mut buf = Vec::new();
        write_ensemble(&mut buf, &ens).unwrap();
        prop_assert_eq!(read_ensemble(buf.as_slice()).unwrap(), ens);
    }
}
