use criterion::{criterion_group, criterion_main, Criterion};
use palm_core::generators::{generate_ensemble, GeneratorKind, GeneratorSpec};
use palm_core::lattice::{decompose, TieBreak};
use palm_core::palm::palm_forward_rooted;
use palm_core::preserving::{build_cdf, encode_point, decode_point, psi_shift, RootedSample};
use palm_core::rng::stream;
use palm_core::stats::weighted_two_sample;
use rand::Rng;
use std::hint::black_box;

fn phi(c: &mut Criterion) {
    let s = [0.3, 0.71, 0.05];
    c.bench_function("phi_encode_d3_b48", |b| b.iter(|| encode_point(black_box(&s), 1.0, 48)));
    let x = encode_point(&s, 1.0, 48);
    c.bench_function("phi_decode_d3_b48", |b| b.iter(|| decode_point(black_box(&x), 3, 1.0, 48)));
}

fn lattice(c: &mut Criterion) {
    let spec = GeneratorSpec::new(GeneratorKind::Poisson, 1.0, 2, 16, 1);
    let s = generate_ensemble(&spec, 1, 1).unwrap().remove(0);
    c.bench_function("decompose_d2_w16", |b| b.iter(|| decompose(black_box(&s.measure), TieBreak::Covariant)));
    let rooted = RootedSample::exact(s);
    let mut rng = stream(2, 0);
    c.bench_function("palm_forward_d2_w16", |b| b.iter(|| palm_forward_rooted(black_box(&rooted), &mut rng)));
}

fn psi(c: &mut Criterion) {
    let spec = GeneratorSpec::new(GeneratorKind::ShotNoiseDensity, 4.0, 2, 1, 32);
    let mu = generate_ensemble(&spec, 1, 3).unwrap().remove(0).measure;
    c.bench_function("build_cdf_d2_g32", |b| b.iter(|| build_cdf(black_box(&mu), &[0.0, 0.0], 1, 0, 48)));
    let cdf = build_cdf(&mu, &[0.0, 0.0], 1, 0, 48).unwrap();
    c.bench_function("psi_shift_d2", |b| b.iter(|| psi_shift(&cdf, 0.5, black_box(&[0.2, 0.6]))));
}

fn tests(c: &mut Criterion) {
    let mut rng = stream(4, 0);
    let a: Vec<f64> = (0..2000).map(|_| rng.random()).collect();
    let b: Vec<f64> = (0..2000).map(|_| rng.random()).collect();
    let w = vec![1.0; 2000];
    c.bench_function("weighted_two_sample_2000_x199", |bench| {
        bench.iter(|| weighted_two_sample(black_box(&a), &w, &b, &w, 199, 0.05, 5))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = phi, lattice, psi, tests
}
criterion_main!(benches);
