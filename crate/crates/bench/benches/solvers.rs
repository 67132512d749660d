use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use teammaxmin::generators::random_team_game;
use teammaxmin::solvers::{
    correlated_team_maxmin, global_optimize, grid_oracle, iterated_lp, support_enumeration,
    GlobalConfig, IteratedLpConfig, SupportEnumConfig,
};

fn correlated(c: &mut Criterion) {
    let mut group = c.benchmark_group("correlated_lp");
    for m in [3, 5, 8] {
        let game = random_team_game(3, m, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &game, |b, g| {
            b.iter(|| correlated_team_maxmin(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn iterated(c: &mut Criterion) {
    let mut group = c.benchmark_group("iterated_lp");
    let cfg = IteratedLpConfig { restarts: 4, seed: 3, ..Default::default() };
    for m in [3, 5, 8] {
        let game = random_team_game(3, m, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &game, |b, g| {
            b.iter(|| iterated_lp(black_box(g), &cfg).unwrap())
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let game = random_team_game(3, 4, 5).unwrap();
    let cfg = SupportEnumConfig::new(0.5);
    c.bench_function("support_enum/m4_eps0.5", |b| {
        b.iter(|| support_enumeration(black_box(&game), &cfg).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let game = random_team_game(3, 3, 9).unwrap();
    c.bench_function("grid_oracle/m3_err0.05", |b| b.iter(|| grid_oracle(black_box(&game), 0.05).unwrap()));
}

fn global(c: &mut Criterion) {
    let game = random_team_game(3, 3, 4).unwrap();
    let cfg = GlobalConfig { accuracy: 1e-4, max_nodes: 200, ..Default::default() };
    c.bench_function("global/m3", |b| b.iter(|| global_optimize(black_box(&game), &cfg).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = correlated, iterated, enumeration, oracle, global
}
criterion_main!(benches);
