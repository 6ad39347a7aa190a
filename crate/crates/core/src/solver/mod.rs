//! Exact solver: simple-path candidates per request, exact per-link
//! allocation of reserved and on-demand pairs, and branch-and-bound over
//! one path per request. Also the expected-value and perfect-information
//! baselines.

mod bnb;
mod edge;
mod newsvendor;
mod paths;

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, AtomicU64};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{scenario_combinations, DemandTable, ModelOptions, MAX_JOINT_REQUESTS};
use crate::net::{Arc, NetworkInstance, Request, Scenario};
use crate::solution::{Allocation, JointCase, JointRecourse, Route, Solution, SolverStats, SpObjective};

use bnb::{shifted_minima, Leaf, Search, Shared};
use edge::{edge_table, joint_case, member_recourse, EdgePlan, LinkParams, Member};

pub use newsvendor::{fill, newsvendor_reserve, DemandPoint, NewsvendorPlan, NewsvendorProfile};
pub use paths::{enumerate_paths, CandidatePath, PathSet};

pub const DEFAULT_MAX_PATHS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub model: ModelOptions,
    /// Candidate paths kept per request.
    pub max_paths: usize,
    /// Worker threads for the search; 1 runs on the calling thread.
    pub threads: usize,
    /// Stop early and return the best plan found so far.
    pub time_limit: Option<Duration>,
    /// Require exactly this many reserved pairs in total.
    pub forced_reservation: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            model: ModelOptions::default(),
            max_paths: DEFAULT_MAX_PATHS,
            threads: 1,
            time_limit: None,
            forced_reservation: None,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub path: CandidatePath,
    /// Per-hop node cost; zero when node cost is charged per pair.
    pub node_cost: f64,
    /// Cost of this path with the request alone in the network, shifted by
    /// each of the context's multipliers.
    pub standalone: Vec<f64>,
}

pub(crate) struct Context<'a> {
    pub instance: &'a NetworkInstance,
    pub options: SolveOptions,
    pub demands: DemandTable,
    /// Per request, cheapest standalone cost first.
    pub candidates: Vec<Vec<Candidate>>,
    /// Branching order over requests.
    pub order: Vec<usize>,
    /// Multipliers on the reservation target; the first is always zero.
    pub lambdas: Vec<f64>,
    /// Forced reservation total, or zero.
    pub target: f64,
    /// `suffix_bound[d][i]` sums the standalone minima under multiplier `i`
    /// of the requests from depth `d` on.
    pub suffix_bound: Vec<Vec<f64>>,
    pub truncated: bool,
}

impl<'a> Context<'a> {
    fn new(instance: &'a NetworkInstance, options: &SolveOptions) -> Result<Self> {
        check_joint_limit(instance, options)?;
        let demands = DemandTable::build(instance)?;
        let mut paths = Vec::with_capacity(instance.requests().len());
        let mut truncated = false;
        for r in 0..instance.requests().len() {
            let set = enumerate_paths(instance, &demands, r, options.max_paths)?;
            truncated |= set.truncated;
            paths.push(set.paths);
        }
        Context::with_paths(instance, options, demands, paths, truncated)
    }

    fn with_paths(instance: &'a NetworkInstance, options: &SolveOptions, demands: DemandTable, paths: Vec<Vec<CandidatePath>>, truncated: bool) -> Result<Self> {
        let mut ctx = Context {
            instance,
            options: options.clone(),
            demands,
            candidates: Vec::new(),
            order: Vec::new(),
            lambdas: multipliers(instance, options),
            target: options.forced_reservation.unwrap_or(0) as f64,
            suffix_bound: Vec::new(),
            truncated,
        };
        let costs = instance.costs();
        let mut candidates = Vec::with_capacity(paths.len());
        for (r, list) in paths.into_iter().enumerate() {
            let mut kept: Vec<Candidate> = list
                .into_iter()
                .filter_map(|path| {
                    let node_cost = if options.model.per_pair_node_cost {
                        0.0
                    } else {
                        path.arcs.iter().map(|a| costs.node_cost(a.to)).sum()
                    };
                    let mut standalone = vec![node_cost; ctx.lambdas.len()];
                    for arc in &path.arcs {
                        let (link, members) = ctx.link_members(arc.edge, &[(r, ctx.direction(arc))]);
                        let shifted = shifted_minima(&edge_table(&link, &members, None), &ctx.lambdas)?;
                        for (s, v) in standalone.iter_mut().zip(shifted) {
                            *s += v;
                        }
                    }
                    Some(Candidate {
                        path,
                        node_cost,
                        standalone,
                    })
                })
                .collect();
            if kept.is_empty() {
                return Err(Error::Infeasible(format!(
                    "request {}: no candidate path has enough pair capacity",
                    instance.requests()[r].id
                )));
            }
            kept.sort_by(|a, b| a.standalone[0].total_cmp(&b.standalone[0]));
            candidates.push(kept);
        }
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by_key(|&r| candidates[r].len());
        let mut suffix_bound = vec![vec![0.0; ctx.lambdas.len()]; order.len() + 1];
        for d in (0..order.len()).rev() {
            for i in 0..ctx.lambdas.len() {
                let least = candidates[order[d]].iter().map(|c| c.standalone[i]).fold(f64::INFINITY, f64::min);
                suffix_bound[d][i] = suffix_bound[d + 1][i] + least;
            }
        }
        ctx.candidates = candidates;
        ctx.order = order;
        ctx.suffix_bound = suffix_bound;
        Ok(ctx)
    }

    /// Whether `arc` runs from the edge's `u` to its `v`.
    pub fn direction(&self, arc: &Arc) -> bool {
        arc.from == self.instance.edge(arc.edge).u
    }

    pub fn link_members(&self, edge: usize, members: &[(usize, bool)]) -> (LinkParams, Vec<Member>) {
        let e = self.instance.edge(edge);
        let costs = self.instance.costs();
        let link = LinkParams {
            cap_reserved: e.cap_reserved,
            cap_ondemand: e.cap_ondemand,
            utilize_cost: costs.utilize_per_pair,
            ondemand_cost: costs.ondemand_per_pair,
            joint: self.options.model.joint_scenarios,
        };
        let members = members
            .iter()
            .map(|&(r, forward)| {
                let entered = if forward { e.v } else { e.u };
                let reserve_cost = if self.options.model.per_pair_node_cost {
                    costs.reserve_per_pair + costs.node_cost(entered)
                } else {
                    costs.reserve_per_pair
                };
                let demands = self
                    .demands
                    .profile(r, edge)
                    .iter()
                    .zip(&self.instance.requests()[r].scenarios)
                    .map(|(d, s)| DemandPoint {
                        pairs: d.pairs().expect("candidate paths avoid blocked links"),
                        probability: s.probability,
                    })
                    .collect();
                Member {
                    demands,
                    reserve_cost,
                }
            })
            .collect();
        (link, members)
    }

    fn paths(&self) -> Vec<Vec<CandidatePath>> {
        self.candidates
            .iter()
            .map(|list| list.iter().map(|c| c.path.clone()).collect())
            .collect()
    }
}

/// Multipliers for the bound under a forced reservation total. Large ones
/// pin every link to its smallest or largest total; the rest sit near the
/// marginal prices of reserving one more pair.
fn multipliers(instance: &NetworkInstance, options: &SolveOptions) -> Vec<f64> {
    if options.forced_reservation.is_none() {
        return vec![0.0];
    }
    let c = instance.costs();
    let node = instance.nodes().map(|n| c.node_cost(n)).fold(0.0, f64::max);
    let reserve = c.reserve_per_pair + if options.model.per_pair_node_cost { node } else { 0.0 };
    let recourse = c.utilize_per_pair.max(c.ondemand_per_pair);
    let big = (reserve + c.utilize_per_pair + c.ondemand_per_pair + 1.0) * (instance.requests().len() + 1) as f64;
    let mut out = vec![0.0, -big, big];
    for s in [1.0, 0.5, 0.25, 0.1, 0.05] {
        out.push(-s * recourse);
    }
    for s in [0.5, 1.0, 2.0] {
        out.push(s * reserve);
    }
    out
}

fn check_joint_limit(instance: &NetworkInstance, options: &SolveOptions) -> Result<()> {
    if options.model.joint_scenarios && instance.requests().len() > MAX_JOINT_REQUESTS {
        return Err(Error::validation(
            "joint_scenarios",
            format!("product space supports at most {MAX_JOINT_REQUESTS} requests"),
        ));
    }
    Ok(())
}

/// Optimal routes and pair allocation for `instance`.
pub fn solve_sp(instance: &NetworkInstance, options: &SolveOptions) -> Result<Solution> {
    let start = Instant::now();
    let ctx = Context::new(instance, options)?;
    search(&ctx, start)
}

fn search(ctx: &Context, start: Instant) -> Result<Solution> {
    if ctx.order.is_empty() {
        if ctx.options.forced_reservation.is_some_and(|n| n > 0) {
            return Err(Error::Infeasible("no requests to reserve pairs for".into()));
        }
        let mut sol = Solution::empty();
        sol.stats.elapsed = start.elapsed();
        return Ok(sol);
    }
    let incumbent = AtomicU64::new(f64::INFINITY.to_bits());
    let timed_out = AtomicBool::new(false);
    let shared = Shared {
        incumbent: &incumbent,
        timed_out: &timed_out,
        deadline: ctx.options.time_limit.map(|d| start + d),
    };

    let results: Vec<(Option<Leaf>, bnb::Counters)> = if ctx.options.threads <= 1 {
        let mut s = Search::new(ctx, &shared);
        s.run(None);
        vec![(s.best, s.counters)]
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.options.threads)
            .build()
            .map_err(|e| Error::validation("threads", e.to_string()))?;
        let first = ctx.candidates[ctx.order[0]].len();
        pool.install(|| {
            (0..first)
                .into_par_iter()
                .map(|c| {
                    let mut s = Search::new(ctx, &shared);
                    s.run(Some(c));
                    (s.best, s.counters)
                })
                .collect()
        })
    };

    let mut stats = SolverStats {
        paths_truncated: ctx.truncated,
        ..SolverStats::default()
    };
    let mut best: Option<Leaf> = None;
    for (leaf, counters) in results {
        stats.nodes_explored += counters.nodes;
        stats.leaves_evaluated += counters.leaves;
        if let Some(leaf) = leaf {
            if best.as_ref().is_none_or(|b| leaf.cmp_key(b, ctx) == Ordering::Less) {
                best = Some(leaf);
            }
        }
    }
    stats.timed_out = timed_out.into_inner();
    let Some(best) = best else {
        let reason = if stats.timed_out {
            "time limit reached before any feasible plan".to_string()
        } else if let Some(n) = ctx.options.forced_reservation {
            format!("no routing admits exactly {n} reserved pairs")
        } else {
            "shared link capacity cannot cover all requests".to_string()
        };
        return Err(Error::Infeasible(reason));
    };

    let routes: Vec<&CandidatePath> = best
        .choice
        .iter()
        .enumerate()
        .map(|(r, &c)| &ctx.candidates[r][c].path)
        .collect();
    let totals = best.forced_totals.clone();
    let mut sol = assemble(ctx, &routes, |edge, link, members| {
        let table = edge_table(link, members, None);
        match &totals {
            Some(t) => table.at(t[edge]).cloned(),
            None => table.best().map(|(_, p)| p.clone()),
        }
    })?;
    stats.elapsed = start.elapsed();
    sol.stats = stats;
    Ok(sol)
}

/// Build the solution for fixed routes, asking `plan` for each used link.
fn assemble(ctx: &Context, routes: &[&CandidatePath], mut plan: impl FnMut(usize, &LinkParams, &[Member]) -> Option<EdgePlan>) -> Result<Solution> {
    let instance = ctx.instance;
    let requests = instance.requests();
    let mut members: Vec<Vec<(usize, bool)>> = vec![Vec::new(); instance.edges().len()];
    let mut stage1 = 0.0;
    let mut stage2 = 0.0;
    let mut route_out = Vec::with_capacity(routes.len());
    for (r, path) in routes.iter().enumerate() {
        for arc in &path.arcs {
            members[arc.edge].push((r, ctx.direction(arc)));
            if !ctx.options.model.per_pair_node_cost {
                stage1 += instance.costs().node_cost(arc.to);
            }
        }
        route_out.push(Route {
            request: requests[r].id,
            path: path.nodes.clone(),
        });
    }

    let mut allocations = Vec::new();
    let mut joint_recourse = Vec::new();
    for (ei, list) in members.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let (link, ms) = ctx.link_members(ei, list);
        let p = plan(ei, &link, &ms).ok_or_else(|| {
            let ids: Vec<i64> = list.iter().map(|&(r, _)| requests[r].id).collect();
            Error::Infeasible(format!("edge {ei} cannot cover requests {ids:?}"))
        })?;
        stage1 += p.stage1;
        stage2 += p.stage2;
        let e = instance.edge(ei);
        for (i, &(r, forward)) in list.iter().enumerate() {
            let (from, to) = if forward { (e.u, e.v) } else { (e.v, e.u) };
            let recourse = if link.joint {
                Vec::new()
            } else {
                member_recourse(&link, &ms[i], p.reserved[i], p.shares[i])
            };
            allocations.push(Allocation {
                request: requests[r].id,
                edge: ei,
                from,
                to,
                reserved: p.reserved[i],
                recourse,
            });
        }
        if link.joint {
            let sizes: Vec<usize> = ms.iter().map(|m| m.demands.len()).collect();
            let cases = scenario_combinations(&sizes)
                .into_iter()
                .map(|combo| {
                    let k: Vec<u32> = combo.iter().zip(&ms).map(|(&s, m)| m.demands[s].pairs).collect();
                    let rec = joint_case(&link, &k, &p.reserved).expect("plan was feasible");
                    JointCase {
                        scenarios: combo,
                        utilized: rec.iter().map(|x| x.utilized).collect(),
                        ondemand: rec.iter().map(|x| x.ondemand).collect(),
                    }
                })
                .collect();
            joint_recourse.push(JointRecourse {
                edge: ei,
                requests: list.iter().map(|&(r, _)| requests[r].id).collect(),
                cases,
            });
        }
    }
    allocations.sort_by_key(|a| (requests.iter().position(|r| r.id == a.request), a.edge));

    Ok(Solution {
        routes: route_out,
        allocations,
        joint_recourse,
        objective: SpObjective::new(stage1, stage2),
        stats: SolverStats::default(),
    })
}

/// Plan routes and reservations against each request's mean requirement,
/// then price the recourse against the true scenarios.
///
/// Routes are drawn from the same candidate set as [`solve_sp`].
pub fn solve_evp(instance: &NetworkInstance, options: &SolveOptions) -> Result<Solution> {
    let start = Instant::now();
    let options = SolveOptions {
        forced_reservation: None,
        ..options.clone()
    };
    let truth = Context::new(instance, &options)?;
    let mean_requests: Vec<Request> = instance
        .requests()
        .iter()
        .map(|r| Request {
            scenarios: Scenario::certain(r.mean_requirement()),
            ..r.clone()
        })
        .collect();
    let mean = instance.with_requests(mean_requests)?;
    let mean_ctx = Context::with_paths(&mean, &options, DemandTable::build(&mean)?, truth.paths(), truth.truncated)?;
    let planned = search(&mean_ctx, start)?;

    let routes: Vec<CandidatePath> = planned
        .routes
        .iter()
        .map(|route| {
            let arcs = crate::model::path_arcs(instance, &route.path).expect("planned route follows links");
            CandidatePath {
                nodes: route.path.clone(),
                arcs,
            }
        })
        .collect();
    let refs: Vec<&CandidatePath> = routes.iter().collect();
    let reserved_of = |r: usize, edge: usize| {
        let id = instance.requests()[r].id;
        planned
            .allocations
            .iter()
            .find(|a| a.request == id && a.edge == edge)
            .map_or(0, |a| a.reserved)
    };
    let mut sol = assemble(&truth, &refs, |edge, link, members| {
        let list: Vec<usize> = refs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.arcs.iter().any(|a| a.edge == edge))
            .map(|(r, _)| r)
            .collect();
        debug_assert_eq!(list.len(), members.len());
        let fixed: Vec<u32> = list.iter().map(|&r| reserved_of(r, edge)).collect();
        edge_table(link, members, Some(&fixed)).best().map(|(_, p)| p.clone())
    })?;
    sol.stats = SolverStats {
        elapsed: start.elapsed(),
        ..planned.stats
    };
    Ok(sol)
}

/// One deterministic subproblem of the perfect-information bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfectInfoCase {
    pub probability: f64,
    pub requests: Vec<i64>,
    /// Scenario index per entry of `requests`.
    pub scenarios: Vec<usize>,
    pub solution: Solution,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfectInfo {
    pub expected_cost: f64,
    pub cases: Vec<PerfectInfoCase>,
}

/// Expected cost when every requirement is known before planning.
///
/// In independent-scenario mode each request is planned alone per scenario,
/// which never exceeds the cost of planning all requests together. In
/// joint-scenario mode every scenario combination is solved exactly.
pub fn solve_perfect_info(instance: &NetworkInstance, options: &SolveOptions) -> Result<PerfectInfo> {
    let options = SolveOptions {
        forced_reservation: None,
        ..options.clone()
    };
    let truth = Context::new(instance, &options)?;
    let truth_paths = truth.paths();
    let requests = instance.requests();
    let groups: Vec<Vec<usize>> = if options.model.joint_scenarios {
        vec![(0..requests.len()).collect()]
    } else {
        (0..requests.len()).map(|r| vec![r]).collect()
    };

    let mut cases = Vec::new();
    let mut expected_cost = 0.0;
    for group in groups {
        let sizes: Vec<usize> = group.iter().map(|&r| requests[r].scenarios.len()).collect();
        for combo in scenario_combinations(&sizes) {
            let mut probability = 1.0;
            let known: Vec<Request> = group
                .iter()
                .zip(&combo)
                .map(|(&r, &s)| {
                    let sc = requests[r].scenarios[s];
                    probability *= sc.probability;
                    Request {
                        scenarios: Scenario::certain(sc.requirement),
                        ..requests[r].clone()
                    }
                })
                .collect();
            let sub = instance.with_requests(known)?;
            let demands = DemandTable::build(&sub)?;
            let mut truncated = false;
            let mut paths = Vec::with_capacity(group.len());
            for (slot, &r) in group.iter().enumerate() {
                let set = enumerate_paths(&sub, &demands, slot, options.max_paths)?;
                truncated |= set.truncated;
                let mut list = set.paths;
                for p in &truth_paths[r] {
                    if !list.contains(p) {
                        list.push(p.clone());
                    }
                }
                paths.push(list);
            }
            let ctx = Context::with_paths(&sub, &options, demands, paths, truncated)?;
            let solution = search(&ctx, Instant::now())?;
            expected_cost += probability * solution.objective.total;
            cases.push(PerfectInfoCase {
                probability,
                requests: group.iter().map(|&r| requests[r].id).collect(),
                scenarios: combo,
                solution,
            });
        }
    }
    Ok(PerfectInfo { expected_cost, cases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate;
    use crate::net::{builtin_topology, CostParams, EdgeDefaults, NodeId};

    fn inst(topology: &str, base: f64, cap: u32, requests: Vec<Request>) -> NetworkInstance {
        let defaults = EdgeDefaults {
            base_fidelity: base,
            cap_reserved: cap,
            ..EdgeDefaults::default()
        };
        builtin_topology(topology)
            .unwrap()
            .into_instance(&defaults, requests, CostParams::default())
            .unwrap()
    }

    fn req(id: i64, src: usize, dst: usize, scenarios: Vec<Scenario>) -> Request {
        Request {
            id,
            source: NodeId(src),
            destination: NodeId(dst),
            scenarios,
        }
    }

    fn check(sol: &Solution, instance: &NetworkInstance, options: &SolveOptions) {
        let ev = evaluate(sol, instance, options.model).unwrap();
        assert!(ev.report.is_feasible(), "{:?}", ev.report.first());
        assert!((ev.objective.total - sol.objective.total).abs() < 1e-6);
        assert!((ev.objective.stage1 - sol.objective.stage1).abs() < 1e-6);
    }

    #[test]
    fn line_example() {
        let i = inst("line(3)", 0.75, 10, vec![req(0, 0, 2, Scenario::certain(0.9))]);
        let opts = SolveOptions::default();
        let sol = solve_sp(&i, &opts).unwrap();
        assert_eq!(sol.routes[0].path, vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert!((sol.objective.total - 354.0).abs() < 1e-9);
        assert!(sol.allocations.iter().all(|a| a.reserved == 2));
        check(&sol, &i, &opts);
    }

    #[test]
    fn no_requests() {
        let i = inst("line(3)", 0.75, 10, vec![]);
        let sol = solve_sp(&i, &SolveOptions::default()).unwrap();
        assert!(sol.routes.is_empty());
        assert_eq!(sol.objective.total, 0.0);
    }

    #[test]
    fn shared_edge_split() {
        let rs = vec![req(0, 0, 1, Scenario::certain(0.9)), req(1, 0, 1, Scenario::certain(0.9))];
        let i = inst("line(2)", 0.95, 1, rs);
        for joint in [false, true] {
            let opts = SolveOptions {
                model: ModelOptions {
                    joint_scenarios: joint,
                    ..ModelOptions::default()
                },
                ..SolveOptions::default()
            };
            let sol = solve_sp(&i, &opts).unwrap();
            let reserved: Vec<u32> = sol.allocations.iter().map(|a| a.reserved).collect();
            assert_eq!(reserved, vec![1, 0]);
            assert!((sol.objective.total - (2.0 * 155.0 + 211.0)).abs() < 1e-9);
            check(&sol, &i, &opts);
        }
    }

    #[test]
    fn baselines_on_single_edge() {
        // base 0.75: k(0.75)=1, k(0.9)=2, k(0.97)=3, k(0.987)=4
        let i = inst("line(2)", 0.75, 10, vec![req(0, 0, 1, Scenario::uniform(&[0.9, 0.987]))]);
        let opts = SolveOptions::default();
        let sp = solve_sp(&i, &opts).unwrap();
        assert!((sp.objective.total - (155.0 + 43.0)).abs() < 1e-9);
        let evp = solve_evp(&i, &opts).unwrap();
        check(&evp, &i, &opts);
        assert!(evp.objective.total >= sp.objective.total - 1e-9);
        let ws = solve_perfect_info(&i, &opts).unwrap();
        // 0.5 * (20 + 2) + 0.5 * (40 + 4) + 155
        assert!((ws.expected_cost - 188.0).abs() < 1e-9);
        assert_eq!(ws.cases.len(), 2);
    }

    #[test]
    fn one_scenario_baselines_agree() {
        let rs = vec![req(0, 0, 13, Scenario::certain(0.97)), req(1, 3, 9, Scenario::certain(0.9))];
        let i = inst("nsfnet", 0.9, 10, rs);
        let opts = SolveOptions::default();
        let sp = solve_sp(&i, &opts).unwrap();
        let evp = solve_evp(&i, &opts).unwrap();
        let ws = solve_perfect_info(&i, &opts).unwrap();
        assert!((sp.objective.total - evp.objective.total).abs() < 1e-9);
        assert!((sp.objective.total - ws.expected_cost).abs() < 1e-9);
    }

    #[test]
    fn threads_do_not_change_the_answer() {
        let rs = vec![
            req(0, 0, 13, Scenario::uniform(&[0.9, 0.95, 0.98])),
            req(1, 3, 9, Scenario::uniform(&[0.85, 0.97])),
            req(2, 6, 11, Scenario::uniform(&[0.8, 0.99])),
        ];
        let i = inst("nsfnet", 0.85, 4, rs);
        let one = solve_sp(&i, &SolveOptions::default()).unwrap();
        let four = solve_sp(
            &i,
            &SolveOptions {
                threads: 4,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one.routes, four.routes);
        assert_eq!(one.allocations, four.allocations);
        assert_eq!(one.objective, four.objective);
        check(&one, &i, &SolveOptions::default());
    }

    #[test]
    fn per_pair_node_cost() {
        let i = inst("line(3)", 0.75, 10, vec![req(0, 0, 2, Scenario::certain(0.9))]);
        let opts = SolveOptions {
            model: ModelOptions {
                per_pair_node_cost: true,
                ..ModelOptions::default()
            },
            ..SolveOptions::default()
        };
        let sol = solve_sp(&i, &opts).unwrap();
        // 2 links, each 2 pairs: (10 + 155) * 2 + 2 * 1
        assert!((sol.objective.total - 2.0 * (330.0 + 2.0)).abs() < 1e-9);
        check(&sol, &i, &opts);
    }

    #[test]
    fn forced_reservation() {
        let i = inst("line(3)", 0.75, 10, vec![req(0, 0, 2, Scenario::certain(0.9))]);
        let at = |n: u64| {
            solve_sp(
                &i,
                &SolveOptions {
                    forced_reservation: Some(n),
                    ..SolveOptions::default()
                },
            )
        };
        assert!((at(4).unwrap().objective.total - 354.0).abs() < 1e-9);
        let zero = at(0).unwrap();
        assert_eq!(zero.reserved_total(), 0);
        assert!((zero.objective.total - (310.0 + 4.0 * 200.0)).abs() < 1e-9);
        assert_eq!(at(5).unwrap().reserved_total(), 5);
        assert!(matches!(at(21), Err(Error::Infeasible(_))));
    }

    #[test]
    fn joint_mode_request_limit() {
        let rs = (0..4).map(|k| req(k, 0, 2, Scenario::certain(0.9))).collect();
        let i = inst("line(3)", 0.95, 10, rs);
        let opts = SolveOptions {
            model: ModelOptions {
                joint_scenarios: true,
                ..ModelOptions::default()
            },
            ..SolveOptions::default()
        };
        assert!(matches!(solve_sp(&i, &opts), Err(Error::Validation { .. })));
    }
}
