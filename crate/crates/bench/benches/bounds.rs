use bellgame_bench::fixture;
use bellgame_core::{classical_bound, ns_bound, seesaw_optimize, SeesawOptions};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("classical_bound");
    for name in ["chaves-triangle", "svetlichny-3", "svetlichny-4"] {
        let (f, m) = fixture(name);
        group.bench_with_input(BenchmarkId::from_parameter(name), &(f, m), |b, (f, m)| {
            b.iter(|| classical_bound(black_box(f), m).unwrap().value)
        });
    }
    group.finish();
}

fn linear_program(c: &mut Criterion) {
    let mut group = c.benchmark_group("ns_bound");
    group.sample_size(20);
    for name in ["chsh", "chaves-triangle", "svetlichny-3"] {
        let (f, m) = fixture(name);
        group.bench_with_input(BenchmarkId::from_parameter(name), &(f, m), |b, (f, m)| {
            b.iter(|| ns_bound(black_box(f), m).unwrap().value)
        });
    }
    group.finish();
}

fn seesaw(c: &mut Criterion) {
    let mut group = c.benchmark_group("seesaw");
    group.sample_size(10);
    let opts = SeesawOptions {
        restarts: 1,
        max_sweeps: 50,
        ..SeesawOptions::default()
    };
    for (name, dims) in [
        ("chaves-triangle", vec![2, 2]),
        ("svetlichny-3", vec![2, 2, 2]),
    ] {
        let (f, m) = fixture(name);
        group.bench_function(name, |b| {
            b.iter(|| {
                seesaw_optimize(black_box(&f), &dims, &m, &opts)
                    .unwrap()
                    .best_value
            })
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, linear_program, seesaw);
criterion_main!(benches);
