use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use kronsynth::partitions::{simple_partition, simple_terms, validate_partition, ValidationMode};
use kronsynth::solvers::{apply_disjointness, disjointness_stack, stack_apply, wht};
use kronsynth::spectrum::{build_schedule, envelope_argmax, AlphaProfile, Envelope, Strategy};
use kronsynth::Semiring;
use kronsynth_bench::random_vector;
use num_rational::BigRational;

fn alternating(d: u32) -> String {
    (0..=d).map(|i| if i % 2 == 0 { 'R' } else { 'C' }).collect()
}

fn partitions(c: &mut Criterion) {
    c.bench_function("simple_partition d=12", |b| b.iter(|| simple_partition(12, black_box(&alternating(12))).unwrap()));
    let fam = simple_partition(8, &alternating(8)).unwrap();
    c.bench_function("validate_partition exhaustive d=8", |b| {
        b.iter(|| validate_partition(black_box(&fam), ValidationMode::Exhaustive).unwrap())
    });
    let circuit = simple_partition(8, &alternating(8)).unwrap().to_circuit(Semiring::Par).unwrap();
    c.bench_function("partition to circuit d=8", |b| b.iter(|| fam.to_circuit(Semiring::Par).unwrap()));
    c.bench_function("materialize d=8", |b| b.iter(|| circuit.materialize().unwrap()));
}

fn spectrum(c: &mut Criterion) {
    let word = alternating(15);
    let p = AlphaProfile::from_terms(&word, 15, simple_terms(15, &word).unwrap());
    let env = Envelope::new(vec![p.clone(), p.transpose()]).unwrap();
    c.bench_function("envelope_argmax d=15 grid=64", |b| b.iter(|| envelope_argmax(black_box(&env), 64)));
    let small = AlphaProfile::from_terms("RR", 1, simple_terms(1, "RR").unwrap());
    let profiles = vec![small.clone(), small.transpose()];
    let one = BigRational::from_integer(1.into());
    c.bench_function("build_schedule exact n=24", |b| {
        b.iter(|| build_schedule(black_box(&profiles), 24, &one, Strategy::Exact).unwrap())
    });
}

fn transforms(c: &mut Criterion) {
    let x = random_vector(1 << 12, 7);
    let sr = Semiring::Rational;
    c.bench_function("wht n=12", |b| b.iter_batched(|| x.clone(), |mut a| wht(sr, &mut a).unwrap(), BatchSize::LargeInput));
    c.bench_function("disjointness fast n=12", |b| b.iter(|| apply_disjointness(sr, black_box(&x)).unwrap()));
    let layers = disjointness_stack(12, 4, false, sr).unwrap();
    c.bench_function("disjointness stack depth=4 n=12", |b| b.iter(|| stack_apply(black_box(&layers), &x).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = partitions, spectrum, transforms
}
criterion_main!(benches);
