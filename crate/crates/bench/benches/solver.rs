use std::hint::black_box;
use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, Criterion};
use epra_core::generate::{random_small_instance, seeded, SmallInstanceConfig};
use epra_core::oracle::{brute_force, OracleLimits};
use epra_core::solver::{newsvendor_reserve, DemandPoint, NewsvendorProfile};
use epra_core::{solve_sp, ModelOptions, NetworkInstance, SolveOptions};

fn load(name: &str) -> NetworkInstance {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    NetworkInstance::load(&path).expect("bundled instance")
}

fn newsvendor(c: &mut Criterion) {
    let profile = NewsvendorProfile {
        demands: (1..=20).map(|k| DemandPoint { pairs: k, probability: 0.05 }).collect(),
        reserve_cost: 10.0,
        utilize_cost: 1.0,
        ondemand_cost: 200.0,
        cap_reserved: 10,
        cap_ondemand: 60,
    };
    c.bench_function("newsvendor_20_scenarios", |b| b.iter(|| newsvendor_reserve(black_box(&profile)).unwrap()));
}

fn solve(c: &mut Criterion) {
    let nsfnet = load("nsfnet.json");
    let small = load("small.json");
    let opts = SolveOptions::default();
    let joint = SolveOptions {
        model: ModelOptions {
            joint_scenarios: true,
            ..ModelOptions::default()
        },
        ..SolveOptions::default()
    };
    let mut group = c.benchmark_group("solve_sp");
    group.sample_size(20);
    group.bench_function("nsfnet_3_requests", |b| b.iter(|| solve_sp(black_box(&nsfnet), &opts).unwrap()));
    group.bench_function("small_independent", |b| b.iter(|| solve_sp(black_box(&small), &opts).unwrap()));
    group.bench_function("small_joint", |b| b.iter(|| solve_sp(black_box(&small), &joint).unwrap()));
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let instances: Vec<_> = (0..20)
        .map(|s| random_small_instance(&mut seeded(s), &SmallInstanceConfig::default()))
        .collect();
    let limits = OracleLimits::default();
    c.bench_function("oracle_20_random", |b| {
        b.iter(|| {
            for inst in &instances {
                black_box(brute_force(inst, ModelOptions::default(), &limits).unwrap());
            }
        })
    });
}

criterion_group!(benches, newsvendor, solve, oracle);
criterion_main!(benches);
