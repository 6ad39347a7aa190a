//! Seeded random instances and request sets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::net::{scenario_grid, CostParams, Edge, NetworkInstance, NodeId, Request, Scenario};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of the random instances used to cross-check the solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SmallInstanceConfig {
    pub max_nodes: usize,
    pub max_requests: usize,
    pub max_scenarios: usize,
    pub max_capacity: u32,
    /// Draw cost parameters too, including on-demand cheaper than utilizing.
    pub random_costs: bool,
}

impl Default for SmallInstanceConfig {
    fn default() -> Self {
        SmallInstanceConfig {
            max_nodes: 6,
            max_requests: 2,
            max_scenarios: 3,
            max_capacity: 8,
            random_costs: true,
        }
    }
}

fn hundredths<R: Rng>(rng: &mut R, lo: u32, hi: u32) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 100.0
}

/// Connected random graph with random link parameters and requests.
pub fn random_small_instance<R: Rng>(rng: &mut R, cfg: &SmallInstanceConfig) -> NetworkInstance {
    let n = rng.gen_range(2..=cfg.max_nodes.max(2));
    let mut links = Vec::new();
    // random spanning tree, then extra chords
    for v in 1..n {
        links.push((rng.gen_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !links.contains(&(u, v)) && rng.gen_bool(0.3) {
                links.push((u, v));
            }
        }
    }
    let edges = links
        .into_iter()
        .map(|(u, v)| Edge {
            u: NodeId(u),
            v: NodeId(v),
            base_fidelity: hundredths(rng, 55, 99),
            cap_reserved: rng.gen_range(1..=cfg.max_capacity.max(1)),
            cap_ondemand: rng.gen_range(0..=cfg.max_capacity),
            fidelity_threshold: hundredths(rng, 50, 90),
        })
        .collect();

    let costs = if cfg.random_costs && rng.gen_bool(0.5) {
        CostParams {
            energy_per_node: rng.gen_range(0..=10) as f64,
            repeater_setup: rng.gen_range(0..=200) as f64,
            reserve_per_pair: rng.gen_range(0..=20) as f64,
            utilize_per_pair: rng.gen_range(0..=10) as f64,
            ondemand_per_pair: rng.gen_range(0..=250) as f64,
            node_overrides: Vec::new(),
        }
    } else {
        CostParams::default()
    };

    let requests = (0..rng.gen_range(1..=cfg.max_requests.max(1)))
        .map(|id| {
            let source = rng.gen_range(0..n);
            let mut destination = rng.gen_range(0..n - 1);
            if destination >= source {
                destination += 1;
            }
            let count = rng.gen_range(1..=cfg.max_scenarios.max(1));
            let mut reqs: Vec<u32> = Vec::new();
            while reqs.len() < count {
                let r = rng.gen_range(50..=99);
                if !reqs.contains(&r) {
                    reqs.push(r);
                }
            }
            reqs.sort_unstable();
            let weights: Vec<u32> = (0..count).map(|_| rng.gen_range(1..=4)).collect();
            let total: u32 = weights.iter().sum();
            Request {
                id: id as i64,
                source: NodeId(source),
                destination: NodeId(destination),
                scenarios: reqs
                    .iter()
                    .zip(&weights)
                    .map(|(&r, &w)| Scenario::new(r as f64 / 100.0, w as f64 / total as f64))
                    .collect(),
            }
        })
        .collect();

    NetworkInstance::new(n, edges, requests, costs).expect("generated instance is valid")
}

/// Grid requirements in `[threshold, f_max]`.
pub fn requirement_support(threshold: f64, step: f64, f_max: f64) -> Result<Vec<f64>> {
    let support: Vec<f64> = scenario_grid(step, f_max)?
        .into_iter()
        .filter(|&w| w >= threshold - 1e-12)
        .collect();
    if support.is_empty() {
        return Err(Error::validation("step", format!("no grid point in [{threshold}, {f_max}]")));
    }
    Ok(support)
}

/// `count` requests between distinct random node pairs, each with
/// requirements uniform over `support`.
pub fn random_requests<R: Rng>(rng: &mut R, num_nodes: usize, count: usize, support: &[f64]) -> Result<Vec<Request>> {
    let mut pairs: Vec<(usize, usize)> = (0..num_nodes)
        .flat_map(|s| (0..num_nodes).filter(move |&d| d != s).map(move |d| (s, d)))
        .collect();
    if count > pairs.len() {
        return Err(Error::validation("requests", format!("{count} requests but only {} node pairs", pairs.len())));
    }
    pairs.shuffle(rng);
    Ok(pairs
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(id, (s, d))| Request {
            id: id as i64,
            source: NodeId(s),
            destination: NodeId(d),
            scenarios: Scenario::uniform(support),
        })
        .collect())
}
