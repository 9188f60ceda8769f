use std::hint::black_box;

use accessalloc::engine::{solve_access_aware, sweep_eta};
use accessalloc::model::{disparity_coefficients, exact_rho, naive_rho};
use accessalloc::optimize::{build_lp, enumerate_vertices, solve};
use accessalloc::sim::{simulate_acquisition, synthetic_locations, SimConfig, SynthProfile};
use accessalloc::{Distance, EngineConfig, EtaSpec, Scenario};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn scenario(k: usize, distance: Distance) -> Scenario {
    let locations = synthetic_locations(k, 7, SynthProfile::Uniform).unwrap();
    Scenario::new(locations, 0.5, 0.1, distance, EtaSpec::Point(0.3)).unwrap()
}

fn exact_share(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_rho");
    for population in [100u64, 10_000, 1_000_000] {
        group.bench_with_input(BenchmarkId::from_parameter(population), &population, |b, &p| {
            b.iter(|| exact_rho(black_box(p / 2), p, 0.4, 0.5).unwrap())
        });
    }
    group.finish();
}

fn simplex(c: &mut Criterion) {
    let mut group = c.benchmark_group("simplex");
    for k in [5, 20, 60] {
        let s = scenario(k, Distance::L1);
        let rho: Vec<f64> = s.betas().iter().map(|&b| naive_rho(b, 0.3).unwrap()).collect();
        let lp = build_lp(&s, &disparity_coefficients(&s, &rho).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(k), &lp, |b, lp| {
            b.iter(|| solve(black_box(lp)))
        });
    }
    group.finish();
}

fn access_aware(c: &mut Criterion) {
    let mut group = c.benchmark_group("access_aware");
    let config = EngineConfig::default();
    for k in [5, 20, 60] {
        let s = scenario(k, Distance::LInf);
        group.bench_with_input(BenchmarkId::from_parameter(k), &s, |b, s| {
            b.iter(|| solve_access_aware(black_box(s), 0.3, &config).unwrap())
        });
    }
    let restarted = EngineConfig {
        restarts: 32,
        seed: 1,
        ..Default::default()
    };
    let s = scenario(10, Distance::L1);
    group.bench_function("k10_32_restarts", |b| {
        b.iter(|| solve_access_aware(black_box(&s), 0.3, &restarted).unwrap())
    });
    group.finish();
}

fn vertices(c: &mut Criterion) {
    let mut group = c.benchmark_group("vertices");
    group.sample_size(10);
    for k in [4, 8, 12] {
        let s = scenario(k, Distance::L1);
        group.bench_with_input(BenchmarkId::from_parameter(k), &s, |b, s| {
            b.iter(|| enumerate_vertices(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let grid: Vec<f64> = (1..20).map(|i| i as f64 * 0.05).collect();
    let s = scenario(10, Distance::L1).with_eta(EtaSpec::Grid(grid)).unwrap();
    let config = EngineConfig::default();
    c.bench_function("sweep_k10_19pts", |b| b.iter(|| sweep_eta(black_box(&s), &config).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let config = SimConfig {
        trials: 1_000,
        ..Default::default()
    };
    c.bench_function("simulate_1000_trials", |b| {
        b.iter(|| simulate_acquisition(black_box(300), 1_000, 0.4, 0.5, &config).unwrap())
    });
}

criterion_group!(benches, exact_share, simplex, access_aware, vertices, sweep, monte_carlo);
criterion_main!(benches);
