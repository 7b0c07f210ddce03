use annealing_bench::gadget_fixture;
use annealing_core::gadget_factory::{build_key, GadgetSpec};
use annealing_core::rng;
use annealing_core::sa_engine::{estimate_score, exact_score};
use annealing_core::schedule_optimizer::{covering_lp_solve, random_feasible_family, separate_paths_exact};
use annealing_core::ScoreMode;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn gadget_propagation(c: &mut Criterion) {
    let mut group = c.benchmark_group("gadget_key_exact");
    group.sample_size(10);
    for m_prime in [100u64, 400] {
        let g = gadget_fixture(1, m_prime, 20);
        let key = build_key(&GadgetSpec::new(1, m_prime, 20));
        group.bench_with_input(BenchmarkId::from_parameter(m_prime), &m_prime, |b, _| {
            b.iter(|| exact_score(black_box(&g), &key, ScoreMode::Absorbing))
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let g = gadget_fixture(1, 25, 2);
    let key = build_key(&GadgetSpec::new(1, 25, 2));
    c.bench_function("estimate_score_1000", |b| {
        b.iter(|| estimate_score(&g, &key, ScoreMode::Absorbing, 1000, 0.99, black_box(7)).unwrap())
    });
}

fn optimizers(c: &mut Criterion) {
    let mut r = rng::rng(11);
    let family = random_feasible_family(6, 6, 6, &mut r);
    c.bench_function("covering_lp_n6_k6", |b| b.iter(|| covering_lp_solve(black_box(&family)).unwrap()));
    let small = random_feasible_family(3, 5, 6, &mut r);
    c.bench_function("separate_paths_n3_k5", |b| {
        b.iter(|| separate_paths_exact(black_box(&small), 1 << 22).unwrap())
    });
}

criterion_group!(benches, gadget_propagation, monte_carlo, optimizers);
criterion_main!(benches);
