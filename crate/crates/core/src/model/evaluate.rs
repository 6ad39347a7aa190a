//! Solver-independent check of a [`Solution`]: every constraint row is
//! recomputed from the raw route and pair counts, and both cost stages are
//! summed from scratch. Fidelity is checked through the purification chain
//! itself, not through the compiled pair demands.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{NetworkInstance, NodeId};
use crate::purification::chained_fidelity;
use crate::solution::{Allocation, ScenarioRecourse, Solution, SpObjective};

use super::{path_arcs, scenario_combinations, ModelOptions};

/// Constraint families, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Constraint {
    /// Source sends one more route than it receives.
    FlowSource,
    /// Destination receives one more route than it sends.
    FlowSink,
    /// Intermediate nodes forward what they receive.
    FlowConservation,
    /// At most one outbound link per node and request.
    SingleOutbound,
    /// Pair counts on a link the request does not traverse.
    IdleLink,
    ReserveCapacity,
    /// Utilized pairs within the reservation.
    UtilizationBound,
    FidelityRequirement,
    FidelityThreshold,
    OndemandCapacity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub request: Option<i64>,
    pub edge: Option<usize>,
    pub node: Option<NodeId>,
    pub scenario: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub objective: SpObjective,
    pub report: FeasibilityReport,
}

struct Checker<'a> {
    instance: &'a NetworkInstance,
    violations: Vec<Violation>,
}

impl Checker<'_> {
    fn flag(&mut self, constraint: Constraint, request: Option<i64>, edge: Option<usize>, node: Option<NodeId>, scenario: Option<usize>, detail: String) {
        self.violations.push(Violation {
            constraint,
            request,
            edge,
            node,
            scenario,
            detail,
        });
    }

    /// Pair-count checks shared by both recourse layouts.
    fn check_recourse(&mut self, ri: usize, edge: usize, scenario: usize, reserved: u32, rec: ScenarioRecourse) {
        let r = &self.instance.requests()[ri];
        let e = self.instance.edge(edge);
        let requirement = r.scenarios[scenario].requirement;
        if rec.utilized > reserved {
            self.flag(Constraint::UtilizationBound, Some(r.id), Some(edge), None, Some(scenario), format!("utilized {} > reserved {reserved}", rec.utilized));
        }
        let pairs = rec.utilized + rec.ondemand;
        if pairs == 0 {
            self.flag(Constraint::FidelityRequirement, Some(r.id), Some(edge), None, Some(scenario), "no pairs on a traversed link".into());
            return;
        }
        let fidelity = chained_fidelity(e.base_fidelity, pairs).unwrap_or(0.0);
        if fidelity < requirement {
            self.flag(Constraint::FidelityRequirement, Some(r.id), Some(edge), None, Some(scenario), format!("{pairs} pairs reach {fidelity}, need {requirement}"));
        }
        if fidelity < e.fidelity_threshold {
            self.flag(Constraint::FidelityThreshold, Some(r.id), Some(edge), None, Some(scenario), format!("{pairs} pairs reach {fidelity}, threshold {}", e.fidelity_threshold));
        }
    }
}

/// Recompute feasibility and cost of `solution` on `instance`.
pub fn evaluate(solution: &Solution, instance: &NetworkInstance, options: ModelOptions) -> Result<Evaluation> {
    let requests = instance.requests();
    let costs = instance.costs();
    if solution.routes.len() != requests.len() {
        return Err(Error::DimensionMismatch(format!("{} routes for {} requests", solution.routes.len(), requests.len())));
    }
    let mut position = HashMap::new();
    for (ri, (route, r)) in solution.routes.iter().zip(requests).enumerate() {
        if route.request != r.id {
            return Err(Error::DimensionMismatch(format!("route {ri} is for request {}, expected {}", route.request, r.id)));
        }
        position.insert(r.id, ri);
    }

    // x[r][(from, to)] as counts, so that a repeated arc shows up as non-binary
    let mut x: Vec<BTreeMap<(NodeId, NodeId), u32>> = vec![BTreeMap::new(); requests.len()];
    let mut used: Vec<HashSet<usize>> = vec![HashSet::new(); requests.len()];
    let mut stage1 = 0.0;
    for (ri, route) in solution.routes.iter().enumerate() {
        if let Some(bad) = route.path.iter().find(|n| n.0 >= instance.num_nodes()) {
            return Err(Error::DimensionMismatch(format!("route {ri} visits unknown node {bad}")));
        }
        let arcs = path_arcs(instance, &route.path)
            .ok_or_else(|| Error::DimensionMismatch(format!("route {ri} uses a missing link")))?;
        for arc in arcs {
            *x[ri].entry((arc.from, arc.to)).or_default() += 1;
            used[ri].insert(arc.edge);
        }
    }

    let mut chk = Checker {
        instance,
        violations: Vec::new(),
    };

    for (ri, r) in requests.iter().enumerate() {
        for n in instance.nodes() {
            let out: u32 = instance.outbound(n).iter().map(|a| x[ri].get(&(a.from, a.to)).copied().unwrap_or(0)).sum();
            let inc: u32 = instance.inbound(n).iter().map(|a| x[ri].get(&(a.from, a.to)).copied().unwrap_or(0)).sum();
            let net = out as i64 - inc as i64;
            if n == r.source {
                if net != 1 {
                    chk.flag(Constraint::FlowSource, Some(r.id), None, Some(n), None, format!("out - in = {net}"));
                }
            } else if n == r.destination {
                if -net != 1 {
                    chk.flag(Constraint::FlowSink, Some(r.id), None, Some(n), None, format!("in - out = {}", -net));
                }
            } else if net != 0 {
                chk.flag(Constraint::FlowConservation, Some(r.id), None, Some(n), None, format!("out - in = {net}"));
            }
            if out > 1 {
                chk.flag(Constraint::SingleOutbound, Some(r.id), None, Some(n), None, format!("{out} outbound links"));
            }
        }
    }

    let mut alloc: HashMap<(usize, usize), &Allocation> = HashMap::new();
    for a in &solution.allocations {
        let ri = *position
            .get(&a.request)
            .ok_or_else(|| Error::DimensionMismatch(format!("allocation for unknown request {}", a.request)))?;
        if a.edge >= instance.edges().len() {
            return Err(Error::DimensionMismatch(format!("allocation on unknown edge {}", a.edge)));
        }
        let e = instance.edge(a.edge);
        if !((a.from == e.u && a.to == e.v) || (a.from == e.v && a.to == e.u)) {
            return Err(Error::DimensionMismatch(format!("allocation endpoints {}-{} do not match edge {}", a.from, a.to, a.edge)));
        }
        let expected = if options.joint_scenarios { 0 } else { requests[ri].scenarios.len() };
        if a.recourse.len() != expected {
            return Err(Error::DimensionMismatch(format!("allocation of request {} on edge {} has {} recourse entries, expected {expected}", a.request, a.edge, a.recourse.len())));
        }
        if alloc.insert((ri, a.edge), a).is_some() {
            return Err(Error::DimensionMismatch(format!("duplicate allocation of request {} on edge {}", a.request, a.edge)));
        }
        let idle = !used[ri].contains(&a.edge);
        if idle && (a.reserved > 0 || a.recourse.iter().any(|s| s.utilized + s.ondemand > 0)) {
            chk.flag(Constraint::IdleLink, Some(a.request), Some(a.edge), None, None, "pairs on a link off the route".into());
        }
    }
    if !options.joint_scenarios && !solution.joint_recourse.is_empty() {
        return Err(Error::DimensionMismatch("joint recourse present in independent-scenario mode".into()));
    }

    let reserved_of = |ri: usize, edge: usize| alloc.get(&(ri, edge)).map_or(0, |a| a.reserved);

    // stage 1: route activations (or per-pair node cost) plus reservations
    for (ri, arcs) in x.iter().enumerate() {
        for (&(_, to), &count) in arcs {
            if !options.per_pair_node_cost {
                stage1 += costs.node_cost(to) * count as f64;
            }
        }
        if options.per_pair_node_cost {
            for arc in path_arcs(instance, &solution.routes[ri].path).unwrap_or_default() {
                stage1 += costs.node_cost(arc.to) * reserved_of(ri, arc.edge) as f64;
            }
        }
    }
    for a in &solution.allocations {
        stage1 += costs.reserve_per_pair * a.reserved as f64;
    }

    for (ei, e) in instance.edges().iter().enumerate() {
        let total: u64 = (0..requests.len()).map(|ri| reserved_of(ri, ei) as u64).sum();
        if total > e.cap_reserved as u64 {
            chk.flag(Constraint::ReserveCapacity, None, Some(ei), None, None, format!("{total} reserved > capacity {}", e.cap_reserved));
        }
    }

    let mut stage2 = 0.0;
    if options.joint_scenarios {
        let mut groups = HashMap::new();
        for (gi, g) in solution.joint_recourse.iter().enumerate() {
            if groups.insert(g.edge, gi).is_some() {
                return Err(Error::DimensionMismatch(format!("duplicate joint recourse for edge {}", g.edge)));
            }
        }
        for (ei, e) in instance.edges().iter().enumerate() {
            let members: Vec<usize> = (0..requests.len()).filter(|&ri| used[ri].contains(&ei)).collect();
            let Some(&gi) = groups.get(&ei) else {
                for &ri in &members {
                    for s in 0..requests[ri].scenarios.len() {
                        chk.check_recourse(ri, ei, s, reserved_of(ri, ei), ScenarioRecourse::default());
                    }
                }
                continue;
            };
            let group = &solution.joint_recourse[gi];
            let ids: Vec<i64> = members.iter().map(|&ri| requests[ri].id).collect();
            if group.requests != ids {
                return Err(Error::DimensionMismatch(format!("joint recourse on edge {ei} lists requests {:?}, routes give {ids:?}", group.requests)));
            }
            let sizes: Vec<usize> = members.iter().map(|&ri| requests[ri].scenarios.len()).collect();
            let expected: HashSet<Vec<usize>> = scenario_combinations(&sizes).into_iter().collect();
            let given: HashSet<Vec<usize>> = group.cases.iter().map(|c| c.scenarios.clone()).collect();
            if given != expected || group.cases.len() != expected.len() {
                return Err(Error::DimensionMismatch(format!("joint recourse on edge {ei} does not cover each scenario combination once")));
            }
            for case in &group.cases {
                if case.utilized.len() != members.len() || case.ondemand.len() != members.len() {
                    return Err(Error::DimensionMismatch(format!("joint case on edge {ei} has wrong width")));
                }
                let mut p = 1.0;
                let mut ondemand_sum = 0u64;
                for (slot, &ri) in members.iter().enumerate() {
                    let s = case.scenarios[slot];
                    p *= requests[ri].scenarios[s].probability;
                    let rec = ScenarioRecourse {
                        utilized: case.utilized[slot],
                        ondemand: case.ondemand[slot],
                    };
                    chk.check_recourse(ri, ei, s, reserved_of(ri, ei), rec);
                    ondemand_sum += rec.ondemand as u64;
                }
                let case_cost: f64 = (0..members.len())
                    .map(|slot| costs.utilize_per_pair * case.utilized[slot] as f64 + costs.ondemand_per_pair * case.ondemand[slot] as f64)
                    .sum();
                stage2 += p * case_cost;
                if ondemand_sum > e.cap_ondemand as u64 {
                    chk.flag(Constraint::OndemandCapacity, None, Some(ei), None, None, format!("{ondemand_sum} on-demand > capacity {} in case {:?}", e.cap_ondemand, case.scenarios));
                }
            }
        }
    } else {
        for (ri, r) in requests.iter().enumerate() {
            let mut edges: Vec<usize> = used[ri].iter().copied().collect();
            edges.sort_unstable();
            for ei in edges {
                for s in 0..r.scenarios.len() {
                    let (reserved, rec) = match alloc.get(&(ri, ei)) {
                        Some(a) => (a.reserved, a.recourse[s]),
                        None => (0, ScenarioRecourse::default()),
                    };
                    chk.check_recourse(ri, ei, s, reserved, rec);
                }
            }
        }
        for a in &solution.allocations {
            let ri = position[&a.request];
            for (s, rec) in a.recourse.iter().enumerate() {
                let p = requests[ri].scenarios[s].probability;
                stage2 += p * (costs.utilize_per_pair * rec.utilized as f64 + costs.ondemand_per_pair * rec.ondemand as f64);
            }
        }
        for (ei, e) in instance.edges().iter().enumerate() {
            let peak: u64 = (0..requests.len())
                .filter_map(|ri| alloc.get(&(ri, ei)))
                .map(|a| a.recourse.iter().map(|s| s.ondemand).max().unwrap_or(0) as u64)
                .sum();
            if peak > e.cap_ondemand as u64 {
                chk.flag(Constraint::OndemandCapacity, None, Some(ei), None, None, format!("worst-case on-demand {peak} > capacity {}", e.cap_ondemand));
            }
        }
    }

    let mut violations = chk.violations;
    violations.sort_by_key(|v| v.constraint);
    Ok(Evaluation {
        objective: SpObjective::new(stage1, stage2),
        report: FeasibilityReport { violations },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{builtin_topology, CostParams, EdgeDefaults, Request, Scenario};
    use crate::solution::Route;

    fn line3() -> NetworkInstance {
        let req = Request {
            id: 0,
            source: NodeId(0),
            destination: NodeId(2),
            scenarios: Scenario::certain(0.9),
        };
        let defaults = EdgeDefaults {
            base_fidelity: 0.75,
            ..EdgeDefaults::default()
        };
        builtin_topology("line(3)")
            .unwrap()
            .into_instance(&defaults, vec![req], CostParams::default())
            .unwrap()
    }

    fn alloc(edge: usize, from: usize, to: usize, reserved: u32, utilized: u32, ondemand: u32) -> Allocation {
        Allocation {
            request: 0,
            edge,
            from: NodeId(from),
            to: NodeId(to),
            reserved,
            recourse: vec![ScenarioRecourse { utilized, ondemand }],
        }
    }

    fn hand_built(pairs: u32) -> Solution {
        Solution {
            routes: vec![Route {
                request: 0,
                path: vec![NodeId(0), NodeId(1), NodeId(2)],
            }],
            allocations: vec![alloc(0, 0, 1, pairs, pairs, 0), alloc(1, 1, 2, pairs, pairs, 0)],
            ..Solution::default()
        }
    }

    #[test]
    fn all_zero_solution_breaks_source_flow() {
        let inst = line3();
        let sol = Solution {
            routes: vec![Route { request: 0, path: vec![] }],
            ..Solution::default()
        };
        let ev = evaluate(&sol, &inst, ModelOptions::default()).unwrap();
        assert_eq!(ev.report.first().unwrap().constraint, Constraint::FlowSource);
        assert_eq!(ev.objective.total, 0.0);
    }

    #[test]
    fn hand_built_optimum_costs() {
        let inst = line3();
        let ev = evaluate(&hand_built(2), &inst, ModelOptions::default()).unwrap();
        assert!(ev.report.is_feasible(), "{:?}", ev.report);
        // 2 hops x 155 + 2 edges x (2 x 10 reserve + 2 x 1 utilize)
        assert_eq!(ev.objective.stage1, 310.0 + 40.0);
        assert_eq!(ev.objective.stage2, 4.0);
        assert_eq!(ev.objective.total, 354.0);
    }

    #[test]
    fn too_few_pairs_breaks_fidelity() {
        let inst = line3();
        let ev = evaluate(&hand_built(1), &inst, ModelOptions::default()).unwrap();
        assert_eq!(ev.report.first().unwrap().constraint, Constraint::FidelityRequirement);
        assert!(ev.report.violations.iter().any(|v| v.constraint == Constraint::FidelityThreshold));
    }

    #[test]
    fn utilization_above_reservation() {
        let inst = line3();
        let mut sol = hand_built(2);
        sol.allocations[0] = alloc(0, 0, 1, 1, 2, 0);
        let ev = evaluate(&sol, &inst, ModelOptions::default()).unwrap();
        assert_eq!(ev.report.first().unwrap().constraint, Constraint::UtilizationBound);
    }

    #[test]
    fn capacity_violations() {
        let inst = line3();
        let mut sol = hand_built(2);
        sol.allocations[0] = alloc(0, 0, 1, 11, 2, 0);
        sol.allocations[1] = alloc(1, 1, 2, 0, 0, 61);
        let ev = evaluate(&sol, &inst, ModelOptions::default()).unwrap();
        let kinds: Vec<_> = ev.report.violations.iter().map(|v| v.constraint).collect();
        assert_eq!(kinds, vec![Constraint::ReserveCapacity, Constraint::OndemandCapacity]);
    }

    #[test]
    fn loops_and_idle_links() {
        let inst = line3();
        let mut sol = hand_built(2);
        sol.routes[0].path = vec![NodeId(0), NodeId(1), NodeId(0), NodeId(1), NodeId(2)];
        let ev = evaluate(&sol, &inst, ModelOptions::default()).unwrap();
        assert_eq!(ev.report.first().unwrap().constraint, Constraint::SingleOutbound);

        let mut sol = hand_built(2);
        sol.routes[0].path = vec![NodeId(0), NodeId(1)];
        let ev = evaluate(&sol, &inst, ModelOptions::default()).unwrap();
        let kinds: Vec<_> = ev.report.violations.iter().map(|v| v.constraint).collect();
        assert!(kinds.contains(&Constraint::FlowSink));
        assert!(kinds.contains(&Constraint::IdleLink));
    }

    #[test]
    fn dimension_errors() {
        let inst = line3();
        let mut sol = hand_built(2);
        sol.routes.clear();
        assert!(matches!(evaluate(&sol, &inst, ModelOptions::default()), Err(Error::DimensionMismatch(_))));

        let mut sol = hand_built(2);
        sol.routes[0].path = vec![NodeId(0), NodeId(2)];
        assert!(matches!(evaluate(&sol, &inst, ModelOptions::default()), Err(Error::DimensionMismatch(_))));

        let mut sol = hand_built(2);
        sol.allocations[0].recourse.push(ScenarioRecourse::default());
        assert!(matches!(evaluate(&sol, &inst, ModelOptions::default()), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn per_pair_node_cost_reading() {
        let inst = line3();
        let opts = ModelOptions {
            per_pair_node_cost: true,
            ..ModelOptions::default()
        };
        let ev = evaluate(&hand_built(2), &inst, opts).unwrap();
        // 2 edges x 2 pairs x (155 + 10)
        assert_eq!(ev.objective.stage1, 660.0);
    }
}
