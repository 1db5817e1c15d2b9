use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vecscal_core::decompose::{debye_decompose, helmholtz};
use vecscal_core::operators as op;
use vecscal_core::random::{random_scalar, random_vector, rng, Envelope};
use vecscal_core::{analyze_vector, synthesize_vector, GridSpec};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("vector transform");
    for l_max in [8, 16] {
        let grid = GridSpec::ball(l_max, 32, 1.0).build().unwrap();
        let v = random_vector(&grid, l_max - 2, Envelope::Polynomial { degree: 3 }, false, &mut rng(1));
        let samples = synthesize_vector(&v);
        group.bench_with_input(BenchmarkId::new("synthesize", l_max), &v, |b, v| b.iter(|| synthesize_vector(black_box(v))));
        group.bench_with_input(BenchmarkId::new("analyze", l_max), &samples, |b, s| {
            b.iter(|| analyze_vector(&grid, black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn operators(c: &mut Criterion) {
    let grid = GridSpec::ball(8, 32, 1.0).build().unwrap();
    let f = random_scalar(&grid, 6, Envelope::Polynomial { degree: 3 }, false, &mut rng(2));
    let v = random_vector(&grid, 6, Envelope::Polynomial { degree: 3 }, false, &mut rng(3));
    c.bench_function("gradient", |b| b.iter(|| op::gradient(black_box(&f))));
    c.bench_function("curl", |b| b.iter(|| op::curl(black_box(&v))));
    c.bench_function("cartesian components", |b| b.iter(|| op::cartesian_components(black_box(&v))));
    c.bench_function("inverse laplacian", |b| b.iter(|| op::inverse_laplacian(black_box(&f))));
}

fn decompositions(c: &mut Criterion) {
    let grid = GridSpec::ball(8, 48, 7.0).build().unwrap();
    let v = random_vector(&grid, 6, Envelope::Gaussian { width: 1.0 }, true, &mut rng(4));
    c.bench_function("helmholtz", |b| b.iter(|| helmholtz(black_box(&v))));
    c.bench_function("debye", |b| b.iter(|| debye_decompose(black_box(&v), 1e-9).unwrap()));
}

criterion_group!(benches, transforms, operators, decompositions);
criterion_main!(benches);
