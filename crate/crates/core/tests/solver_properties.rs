//! Structural properties of optimal plans on random small instances.

use std::collections::HashMap;

use epra_core::generate::{random_small_instance, seeded, SmallInstanceConfig};
use epra_core::{evaluate, solve_sp, ModelOptions, NetworkInstance, Request, Scenario, Solution, SolveOptions};

fn feasible(seeds: std::ops::Range<u64>, cfg: &SmallInstanceConfig, opts: &SolveOptions) -> Vec<(u64, NetworkInstance, Solution)> {
    seeds
        .filter_map(|s| {
            let inst = random_small_instance(&mut seeded(s), cfg);
            solve_sp(&inst, opts).ok().map(|sol| (s, inst, sol))
        })
        .collect()
}

#[test]
fn capacities_hold() {
    let opts = SolveOptions::default();
    for (seed, inst, sol) in feasible(0..200, &SmallInstanceConfig::default(), &opts) {
        let mut reserved: HashMap<usize, u32> = HashMap::new();
        let mut ondemand: HashMap<usize, u32> = HashMap::new();
        for a in &sol.allocations {
            *reserved.entry(a.edge).or_default() += a.reserved;
            *ondemand.entry(a.edge).or_default() += a.recourse.iter().map(|r| r.ondemand).max().unwrap_or(0);
            for r in &a.recourse {
                assert!(r.utilized <= a.reserved, "seed {seed}: utilizes more than reserved");
            }
        }
        for (e, y) in reserved {
            assert!(y <= inst.edge(e).cap_reserved, "seed {seed}: edge {e} reserves {y}");
        }
        for (e, y) in ondemand {
            assert!(y <= inst.edge(e).cap_ondemand, "seed {seed}: edge {e} on-demand {y}");
        }
        let cap: u64 = inst.edges().iter().map(|e| e.cap_reserved as u64).sum();
        assert!(sol.reserved_total() <= cap);
    }
}

fn raise(r: &Request, delta: f64) -> Request {
    Request {
        scenarios: r
            .scenarios
            .iter()
            .map(|s| Scenario::new((s.requirement + delta).min(0.99), s.probability))
            .collect(),
        ..r.clone()
    }
}

#[test]
fn stricter_requirements_never_cost_less() {
    let opts = SolveOptions::default();
    let mut compared = 0;
    for (seed, inst, sol) in feasible(300..450, &SmallInstanceConfig::default(), &opts) {
        let Ok(stricter) = inst.with_requests(inst.requests().iter().map(|r| raise(r, 0.05)).collect()) else {
            continue;
        };
        if let Ok(harder) = solve_sp(&stricter, &opts) {
            compared += 1;
            assert!(
                harder.objective.total >= sol.objective.total - 1e-9,
                "seed {seed}: {} < {}",
                harder.objective.total,
                sol.objective.total
            );
        }
    }
    assert!(compared > 50);
}

#[test]
fn thread_count_does_not_change_the_plan() {
    let cfg = SmallInstanceConfig {
        max_requests: 3,
        ..SmallInstanceConfig::default()
    };
    let serial = SolveOptions::default();
    let parallel = SolveOptions {
        threads: 4,
        ..SolveOptions::default()
    };
    for (seed, inst, a) in feasible(600..700, &cfg, &serial) {
        let b = solve_sp(&inst, &parallel).unwrap();
        assert_eq!(a.routes, b.routes, "seed {seed}");
        assert_eq!(a.allocations, b.allocations, "seed {seed}");
        assert_eq!(a.objective, b.objective, "seed {seed}");
    }
}

#[test]
fn saved_plans_reevaluate_to_the_same_cost() {
    for model in [
        ModelOptions::default(),
        ModelOptions {
            joint_scenarios: true,
            ..ModelOptions::default()
        },
    ] {
        let opts = SolveOptions {
            model,
            ..SolveOptions::default()
        };
        for (seed, inst, sol) in feasible(800..860, &SmallInstanceConfig::default(), &opts) {
            let text = serde_json::to_string(&sol).unwrap();
            let back: Solution = serde_json::from_str(&text).unwrap();
            let ev = evaluate(&back, &inst, model).unwrap();
            assert!(ev.report.is_feasible(), "seed {seed}: {:?}", ev.report.first());
            assert!((ev.objective.total - sol.objective.total).abs() < 1e-9, "seed {seed}");
        }
    }
}
