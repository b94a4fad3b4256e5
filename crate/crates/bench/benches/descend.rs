use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, Criterion};
use orbitact_core::solver::{circular_seed, descend, multistart, MultistartOptions, SolveOptions};
use orbitact_core::{PotentialParams, PotentialSpec};

fn reference() -> PotentialSpec {
    let params = PotentialParams {
        g: 0.1,
        theta: 0.0,
        r1: 2.0,
        r2: 3.0,
        ..Default::default()
    };
    PotentialSpec::uniform(params, 2, 2.0 * PI).unwrap()
}

fn bench_descend(c: &mut Criterion) {
    let spec = reference();
    let seed = circular_seed(2, 2, 2.0 * PI, 8, 1, 0.75).unwrap();
    let start = seed
        .with_coefficients(seed.coefficients().iter().enumerate().map(|(q, c)| c + 1e-3 * (q as f64).sin()).collect())
        .unwrap();
    let opts = SolveOptions::default();
    c.bench_function("descend/two_body_w1", |b| b.iter(|| descend(&spec, &start, &opts).unwrap().iterations));

    let mut group = c.benchmark_group("multistart");
    group.sample_size(10);
    for threads in [1, 0] {
        let mopts = MultistartOptions { threads, ..Default::default() };
        group.bench_function(format!("classes_1_3_5_threads_{threads}"), |b| {
            b.iter(|| multistart(&spec, &[1, 3, 5], 2, &opts, &mopts).unwrap().records.len())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_descend);
criterion_main!(benches);
