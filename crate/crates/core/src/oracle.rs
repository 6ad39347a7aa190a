//! Brute-force reference optimum for small instances.
//!
//! Shares nothing with the solver beyond the instance types: paths come
//! from a plain DFS, every per-request reservation vector is tried on every
//! link, and every recourse split `(utilized, ondemand)` is checked against
//! the purified fidelity directly.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::ModelOptions;
use crate::net::{NetworkInstance, NodeId};
use crate::purification::chained_fidelity;
use crate::solution::{Allocation, JointCase, JointRecourse, Route, ScenarioRecourse, Solution, SpObjective};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_requests: usize,
    pub max_scenarios: usize,
    /// Bound on both reserved and on-demand capacity of every link.
    pub max_capacity: u32,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_nodes: 6,
            max_requests: 2,
            max_scenarios: 3,
            max_capacity: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub cost: f64,
    pub solution: Solution,
    /// Feasible (routes, reservation vector) pairs seen across all links.
    pub feasible_assignments: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleOutcome {
    Optimal(OracleResult),
    Infeasible,
}

impl OracleOutcome {
    pub fn cost(&self) -> Option<f64> {
        match self {
            OracleOutcome::Optimal(r) => Some(r.cost),
            OracleOutcome::Infeasible => None,
        }
    }
}

fn check_limits(instance: &NetworkInstance, limits: &OracleLimits) -> Result<()> {
    let fail = |what: String| Err(Error::OracleLimits(what));
    if instance.num_nodes() > limits.max_nodes {
        return fail(format!("{} nodes > {}", instance.num_nodes(), limits.max_nodes));
    }
    if instance.requests().len() > limits.max_requests {
        return fail(format!("{} requests > {}", instance.requests().len(), limits.max_requests));
    }
    for r in instance.requests() {
        if r.scenarios.len() > limits.max_scenarios {
            return fail(format!("request {} has {} scenarios > {}", r.id, r.scenarios.len(), limits.max_scenarios));
        }
    }
    for (i, e) in instance.edges().iter().enumerate() {
        if e.cap_reserved > limits.max_capacity || e.cap_ondemand > limits.max_capacity {
            return fail(format!("edge {i} capacity {}/{} > {}", e.cap_reserved, e.cap_ondemand, limits.max_capacity));
        }
    }
    Ok(())
}

fn simple_paths(instance: &NetworkInstance, src: NodeId, dst: NodeId) -> Vec<Vec<NodeId>> {
    fn go(instance: &NetworkInstance, path: &mut Vec<NodeId>, dst: NodeId, out: &mut Vec<Vec<NodeId>>) {
        let here = *path.last().expect("non-empty");
        if here == dst {
            out.push(path.clone());
            return;
        }
        for e in instance.edges() {
            let next = if e.u == here {
                e.v
            } else if e.v == here {
                e.u
            } else {
                continue;
            };
            if !path.contains(&next) {
                path.push(next);
                go(instance, path, dst, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(instance, &mut vec![src], dst, &mut out);
    out
}

fn find_edge(instance: &NetworkInstance, a: NodeId, b: NodeId) -> usize {
    instance
        .edges()
        .iter()
        .position(|e| (e.u == a && e.v == b) || (e.u == b && e.v == a))
        .expect("path follows edges")
}

/// A request on a link: reservation price and (target, probability) per scenario.
#[derive(Clone, Debug)]
struct Use {
    reserve_cost: f64,
    scenarios: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
struct LinkBest {
    cost: f64,
    stage1: f64,
    reserved: Vec<u32>,
    /// Independent mode: per member, per scenario.
    recourse: Vec<Vec<ScenarioRecourse>>,
    /// Joint mode: (scenario combination, per-member recourse).
    cases: Vec<(Vec<usize>, Vec<ScenarioRecourse>)>,
    feasible: u64,
}

struct Link {
    cap_reserved: u32,
    cap_ondemand: u32,
    utilize: f64,
    ondemand: f64,
    /// `fidelity[n]` after purifying `n` pairs; `fidelity[0]` unused.
    fidelity: Vec<f64>,
}

impl Link {
    /// Cheapest split for one scenario with `reserved` reserved pairs and
    /// exactly `yo` on-demand pairs.
    fn split(&self, target: f64, reserved: u32, yo: u32) -> Option<(f64, ScenarioRecourse)> {
        let mut best: Option<(f64, ScenarioRecourse)> = None;
        for ye in 0..=reserved {
            let n = (ye + yo) as usize;
            if n == 0 || self.fidelity[n] < target {
                continue;
            }
            let c = self.utilize * ye as f64 + self.ondemand * yo as f64;
            if best.is_none_or(|(b, _)| c < b) {
                best = Some((c, ScenarioRecourse { utilized: ye, ondemand: yo }));
            }
        }
        best
    }

    /// Cheapest split with at most `budget` on-demand pairs.
    fn split_within(&self, target: f64, reserved: u32, budget: u32) -> Option<(f64, ScenarioRecourse)> {
        let mut best: Option<(f64, ScenarioRecourse)> = None;
        for yo in 0..=budget {
            if let Some((c, rec)) = self.split(target, reserved, yo) {
                if best.is_none_or(|(b, _)| c < b) {
                    best = Some((c, rec));
                }
            }
        }
        best
    }

    fn solve(&self, uses: &[Use], joint: bool) -> Option<LinkBest> {
        let mut best: Option<LinkBest> = None;
        let mut feasible = 0;
        for reserved in vectors(uses.len(), self.cap_reserved) {
            let stage1: f64 = uses.iter().zip(&reserved).map(|(u, &y)| u.reserve_cost * y as f64).sum();
            let found = if joint {
                self.joint_recourse(uses, &reserved)
            } else {
                self.independent_recourse(uses, &reserved)
            };
            let Some((stage2, recourse, cases)) = found else { continue };
            feasible += 1;
            let cost = stage1 + stage2;
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                best = Some(LinkBest {
                    cost,
                    stage1,
                    reserved,
                    recourse,
                    cases,
                    feasible: 0,
                });
            }
        }
        best.map(|b| LinkBest { feasible, ..b })
    }

    /// On-demand is capped by a per-request allowance covering all of that
    /// request's scenarios; allowances share the link's capacity.
    #[allow(clippy::type_complexity)]
    fn independent_recourse(&self, uses: &[Use], reserved: &[u32]) -> Option<(f64, Vec<Vec<ScenarioRecourse>>, Vec<(Vec<usize>, Vec<ScenarioRecourse>)>)> {
        let mut best: Option<(f64, Vec<Vec<ScenarioRecourse>>)> = None;
        'budgets: for budget in vectors(uses.len(), self.cap_ondemand) {
            let mut total = 0.0;
            let mut recourse = Vec::with_capacity(uses.len());
            for (i, u) in uses.iter().enumerate() {
                let mut per = Vec::with_capacity(u.scenarios.len());
                for &(target, p) in &u.scenarios {
                    let Some((c, rec)) = self.split_within(target, reserved[i], budget[i]) else { continue 'budgets };
                    total += p * c;
                    per.push(rec);
                }
                recourse.push(per);
            }
            if best.as_ref().is_none_or(|(b, _)| total < *b) {
                best = Some((total, recourse));
            }
        }
        best.map(|(c, r)| (c, r, Vec::new()))
    }

    /// On-demand capacity holds in every combination of scenarios.
    #[allow(clippy::type_complexity)]
    fn joint_recourse(&self, uses: &[Use], reserved: &[u32]) -> Option<(f64, Vec<Vec<ScenarioRecourse>>, Vec<(Vec<usize>, Vec<ScenarioRecourse>)>)> {
        let mut total = 0.0;
        let mut cases = Vec::new();
        for combo in combinations(&uses.iter().map(|u| u.scenarios.len()).collect::<Vec<_>>()) {
            let p: f64 = combo.iter().zip(uses).map(|(&s, u)| u.scenarios[s].1).product();
            let mut best: Option<(f64, Vec<ScenarioRecourse>)> = None;
            for ondemand in vectors(uses.len(), self.cap_ondemand) {
                let mut c = 0.0;
                let mut recs = Vec::with_capacity(uses.len());
                let mut ok = true;
                for (i, u) in uses.iter().enumerate() {
                    match self.split(u.scenarios[combo[i]].0, reserved[i], ondemand[i]) {
                        Some((ci, rec)) => {
                            c += ci;
                            recs.push(rec);
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok && best.as_ref().is_none_or(|(b, _)| c < *b) {
                    best = Some((c, recs));
                }
            }
            let (c, recs) = best?;
            total += p * c;
            cases.push((combo, recs));
        }
        Some((total, Vec::new(), cases))
    }
}

/// Every vector of `len` nonnegative integers summing to at most `cap`.
fn vectors(len: usize, cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; len];
    fn go(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[pos] = v;
            go(pos + 1, left - v, cur, out);
        }
        cur[pos] = 0;
    }
    go(0, cap, &mut cur, &mut out);
    out
}

fn combinations(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        let mut next = Vec::with_capacity(out.len() * n);
        for prefix in &out {
            for s in 0..n {
                let mut v = prefix.clone();
                v.push(s);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Exact optimum by exhaustive enumeration; refuses instances beyond `limits`.
pub fn brute_force(instance: &NetworkInstance, options: ModelOptions, limits: &OracleLimits) -> Result<OracleOutcome> {
    check_limits(instance, limits)?;
    let costs = instance.costs();
    let requests = instance.requests();
    let links: Vec<Link> = instance
        .edges()
        .iter()
        .map(|e| {
            let n = (e.cap_reserved + e.cap_ondemand) as usize;
            let mut fidelity = vec![0.0; n + 1];
            for (k, f) in fidelity.iter_mut().enumerate().skip(1) {
                *f = chained_fidelity(e.base_fidelity, k as u32)?;
            }
            Ok(Link {
                cap_reserved: e.cap_reserved,
                cap_ondemand: e.cap_ondemand,
                utilize: costs.utilize_per_pair,
                ondemand: costs.ondemand_per_pair,
                fidelity,
            })
        })
        .collect::<Result<_>>()?;

    let path_lists: Vec<Vec<Vec<NodeId>>> = requests.iter().map(|r| simple_paths(instance, r.source, r.destination)).collect();
    let combos = combinations(&path_lists.iter().map(Vec::len).collect::<Vec<_>>());

    // (edge, [(request, entered node)]) -> best link plan
    let mut memo: HashMap<(usize, Vec<(usize, NodeId)>), Option<LinkBest>> = HashMap::new();
    let mut feasible_assignments = 0u64;
    let mut best: Option<(f64, Vec<usize>, Vec<(usize, Vec<(usize, NodeId)>)>)> = None;

    for combo in combos {
        let mut users: Vec<Vec<(usize, NodeId)>> = vec![Vec::new(); links.len()];
        let mut node_cost = 0.0;
        for (r, &pi) in combo.iter().enumerate() {
            for w in path_lists[r][pi].windows(2) {
                users[find_edge(instance, w[0], w[1])].push((r, w[1]));
                if !options.per_pair_node_cost {
                    node_cost += costs.node_cost(w[1]);
                }
            }
        }
        let mut total = node_cost;
        let mut ok = true;
        let mut used = Vec::new();
        for (ei, list) in users.into_iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            let key = (ei, list.clone());
            let plan = memo.entry(key).or_insert_with(|| {
                let e = instance.edge(ei);
                let uses: Vec<Use> = list
                    .iter()
                    .map(|&(r, entered)| Use {
                        reserve_cost: costs.reserve_per_pair + if options.per_pair_node_cost { costs.node_cost(entered) } else { 0.0 },
                        scenarios: requests[r]
                            .scenarios
                            .iter()
                            .map(|s| (s.requirement.max(e.fidelity_threshold), s.probability))
                            .collect(),
                    })
                    .collect();
                links[ei].solve(&uses, options.joint_scenarios)
            });
            match plan {
                Some(p) => {
                    feasible_assignments += p.feasible;
                    total += p.cost;
                }
                None => {
                    ok = false;
                    break;
                }
            }
            used.push((ei, list));
        }
        if ok && best.as_ref().is_none_or(|(b, _, _)| total < *b) {
            best = Some((total, combo, used));
        }
    }

    let Some((cost, combo, used)) = best else {
        return Ok(OracleOutcome::Infeasible);
    };

    let mut stage1 = if options.per_pair_node_cost {
        0.0
    } else {
        combo
            .iter()
            .enumerate()
            .flat_map(|(r, &pi)| path_lists[r][pi].iter().skip(1))
            .map(|&n| costs.node_cost(n))
            .sum()
    };
    let mut allocations = Vec::new();
    let mut joint_recourse = Vec::new();
    for (ei, list) in used {
        let plan = memo[&(ei, list.clone())].clone().expect("feasible");
        stage1 += plan.stage1;
        let e = instance.edge(ei);
        for (i, &(r, entered)) in list.iter().enumerate() {
            let from = if entered == e.v { e.u } else { e.v };
            allocations.push(Allocation {
                request: requests[r].id,
                edge: ei,
                from,
                to: entered,
                reserved: plan.reserved[i],
                recourse: if options.joint_scenarios { Vec::new() } else { plan.recourse[i].clone() },
            });
        }
        if options.joint_scenarios {
            joint_recourse.push(JointRecourse {
                edge: ei,
                requests: list.iter().map(|&(r, _)| requests[r].id).collect(),
                cases: plan
                    .cases
                    .iter()
                    .map(|(scenarios, recs)| JointCase {
                        scenarios: scenarios.clone(),
                        utilized: recs.iter().map(|x| x.utilized).collect(),
                        ondemand: recs.iter().map(|x| x.ondemand).collect(),
                    })
                    .collect(),
            });
        }
    }
    let routes = combo
        .iter()
        .enumerate()
        .map(|(r, &pi)| Route {
            request: requests[r].id,
            path: path_lists[r][pi].clone(),
        })
        .collect();
    let solution = Solution {
        routes,
        allocations,
        joint_recourse,
        objective: SpObjective::new(stage1, cost - stage1),
        ..Solution::default()
    };
    Ok(OracleOutcome::Optimal(OracleResult {
        cost,
        solution,
        feasible_assignments,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate;
    use crate::net::{builtin_topology, CostParams, EdgeDefaults, Request, Scenario};

    fn inst(topology: &str, base: f64, cap_reserved: u32, cap_ondemand: u32, requests: Vec<Request>) -> NetworkInstance {
        let defaults = EdgeDefaults {
            base_fidelity: base,
            cap_reserved,
            cap_ondemand,
            ..EdgeDefaults::default()
        };
        builtin_topology(topology)
            .unwrap()
            .into_instance(&defaults, requests, CostParams::default())
            .unwrap()
    }

    fn req(src: usize, dst: usize, scenarios: Vec<Scenario>) -> Request {
        Request {
            id: 0,
            source: NodeId(src),
            destination: NodeId(dst),
            scenarios,
        }
    }

    #[test]
    fn line_example() {
        let i = inst("line(3)", 0.75, 8, 8, vec![req(0, 2, Scenario::certain(0.9))]);
        let OracleOutcome::Optimal(res) = brute_force(&i, ModelOptions::default(), &OracleLimits::default()).unwrap() else {
            panic!("feasible")
        };
        assert!((res.cost - 354.0).abs() < 1e-9);
        let ev = evaluate(&res.solution, &i, ModelOptions::default()).unwrap();
        assert!(ev.report.is_feasible());
        assert!((ev.objective.total - res.cost).abs() < 1e-9);
    }

    #[test]
    fn two_point_edge() {
        // base 0.75: 2 pairs reach 0.9, 4 reach 0.987
        let i = inst("line(2)", 0.75, 8, 8, vec![req(0, 1, Scenario::uniform(&[0.9, 0.987]))]);
        let res = brute_force(&i, ModelOptions::default(), &OracleLimits::default()).unwrap();
        assert!((res.cost().unwrap() - (155.0 + 43.0)).abs() < 1e-9);
    }

    #[test]
    fn unreachable_fidelity() {
        let i = inst("line(3)", 0.75, 2, 1, vec![req(0, 2, Scenario::certain(0.98))]);
        assert_eq!(brute_force(&i, ModelOptions::default(), &OracleLimits::default()).unwrap(), OracleOutcome::Infeasible);
    }

    #[test]
    fn refuses_large_instances() {
        let i = inst("nsfnet", 0.9, 8, 8, vec![]);
        assert!(matches!(brute_force(&i, ModelOptions::default(), &OracleLimits::default()), Err(Error::OracleLimits(_))));
        let i = inst("line(2)", 0.9, 10, 8, vec![]);
        assert!(matches!(brute_force(&i, ModelOptions::default(), &OracleLimits::default()), Err(Error::OracleLimits(_))));
    }

    #[test]
    fn vectors_cover_budget() {
        assert_eq!(vectors(2, 2).len(), 6);
        assert_eq!(vectors(1, 3), vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!(vectors(0, 5), vec![Vec::<u32>::new()]);
    }
}
