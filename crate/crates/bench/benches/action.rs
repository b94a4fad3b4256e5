use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use orbitact_core::loopspace::default_grid_points;
use orbitact_core::solver::circular_seed;
use orbitact_core::{ActionFunctional, LoopConfiguration, PotentialParams, PotentialSpec};

fn loop_for(n: usize, harmonics: usize) -> LoopConfiguration {
    let lp = circular_seed(n, 2, 2.0 * PI, harmonics, 1, 1.3).unwrap();
    // fill the higher harmonics so the basis sums are not mostly zeros
    let c = lp
        .coefficients()
        .iter()
        .enumerate()
        .map(|(q, c)| c + 0.01 * ((q * 7919) % 101) as f64 / 101.0)
        .collect();
    lp.with_coefficients(c).unwrap()
}

fn bench_action(c: &mut Criterion) {
    let mut group = c.benchmark_group("action");
    for &(n, m) in &[(2, 8), (3, 8), (3, 16), (5, 16)] {
        let spec = PotentialSpec::uniform(PotentialParams::default(), n, 2.0 * PI).unwrap();
        let f = ActionFunctional::new(&spec, 2, m, default_grid_points(m)).unwrap();
        let lp = loop_for(n, m);
        let id = format!("N{n}_M{m}");
        group.bench_with_input(BenchmarkId::new("value", &id), &lp, |b, lp| {
            b.iter(|| f.value(black_box(lp)).unwrap().value)
        });
        group.bench_with_input(BenchmarkId::new("value_and_gradient", &id), &lp, |b, lp| {
            b.iter(|| f.evaluate(black_box(lp)).unwrap().grad_norm())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_action);
criterion_main!(benches);
