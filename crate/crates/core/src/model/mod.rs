//! Deterministic-equivalent program: routing, reservation and per-scenario
//! recourse variables, the constraint rows and the objective.
//!
//! The fidelity constraints are compiled ahead of time. For a request `r`,
//! a link `e` and a scenario requirement `w`, the link must carry at least
//! `min_pairs(base_e, max(w, threshold_e))` utilized plus on-demand pairs.
//! Both the requirement and the threshold row collapse into that one
//! lower bound.

mod dump;
mod evaluate;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{Arc, NetworkInstance, NodeId};
use crate::purification::{PairDemand, PurificationTable};

pub use evaluate::{evaluate, Constraint, Evaluation, FeasibilityReport, Violation};

/// Joint-scenario mode enumerates the product of scenario spaces.
pub const MAX_JOINT_REQUESTS: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Charge node energy and setup per reserved pair instead of once per hop.
    pub per_pair_node_cost: bool,
    /// Index recourse by the joint scenario of all requests instead of
    /// enforcing on-demand capacity against each request's worst case.
    pub joint_scenarios: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Route,
    Reserved,
    Utilized,
    OnDemand,
    /// Largest on-demand count of a request on a link across its scenarios.
    OnDemandPeak,
    /// Reserved pairs on a directed arc; only with per-pair node costs.
    ArcPairs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub kind: VarKind,
    pub name: String,
    /// Upper bound; route variables are binary.
    pub upper: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub family: Constraint,
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Demand of each (request, edge, scenario) triple.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandTable {
    // [request][edge][scenario]
    table: Vec<Vec<Vec<PairDemand>>>,
}

impl DemandTable {
    pub fn build(instance: &NetworkInstance) -> Result<Self> {
        let purifiers = instance
            .edges()
            .iter()
            .map(|e| PurificationTable::new(e.base_fidelity, e.cap_reserved + e.cap_ondemand))
            .collect::<Result<Vec<_>>>()?;
        let table = instance
            .requests()
            .iter()
            .map(|r| {
                instance
                    .edges()
                    .iter()
                    .zip(&purifiers)
                    .map(|(e, purifier)| {
                        r.scenarios
                            .iter()
                            .map(|s| demand_for(purifier, s.requirement, e.fidelity_threshold))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(DemandTable { table })
    }

    pub fn get(&self, request: usize, edge: usize, scenario: usize) -> PairDemand {
        self.table[request][edge][scenario]
    }

    /// Demands of `request` on `edge`, one per scenario.
    pub fn profile(&self, request: usize, edge: usize) -> &[PairDemand] {
        &self.table[request][edge]
    }

    /// Whether `edge` can serve every scenario of `request`.
    pub fn edge_usable(&self, request: usize, edge: usize) -> bool {
        self.table[request][edge].iter().all(|d| d.is_reachable())
    }
}

fn demand_for(purifier: &PurificationTable, requirement: f64, threshold: f64) -> PairDemand {
    let target = requirement.max(threshold);
    if purifier.base_fidelity() <= 0.5 && target > purifier.base_fidelity() {
        return PairDemand::Unreachable;
    }
    purifier.min_pairs(target)
}

/// The compiled deterministic equivalent.
#[derive(Clone, Debug)]
pub struct SpModel {
    pub options: ModelOptions,
    pub arcs: Vec<Arc>,
    pub demands: DemandTable,
    pub variables: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Objective coefficient per variable.
    pub objective: Vec<f64>,
}

impl SpModel {
    pub fn count(&self, kind: VarKind) -> usize {
        self.variables.iter().filter(|v| v.kind == kind).count()
    }

    pub fn rows_of(&self, family: Constraint) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.family == family)
    }

    /// LP-style text listing, one row per line, stable order.
    pub fn dump(&self) -> String {
        dump::render(self)
    }
}

/// Assemble the deterministic equivalent for `instance`.
///
/// Fails when some request has no source-destination path whose links can
/// all meet its scenario demands.
pub fn compile(instance: &NetworkInstance, options: ModelOptions) -> Result<SpModel> {
    if options.joint_scenarios && instance.requests().len() > MAX_JOINT_REQUESTS {
        return Err(Error::validation(
            "joint_scenarios",
            format!("product space supports at most {MAX_JOINT_REQUESTS} requests"),
        ));
    }
    let demands = DemandTable::build(instance)?;
    check_structure(instance, &demands)?;
    Ok(Builder::new(instance, options, demands).build())
}

fn check_structure(instance: &NetworkInstance, demands: &DemandTable) -> Result<()> {
    for (ri, r) in instance.requests().iter().enumerate() {
        let mut seen = vec![false; instance.num_nodes()];
        let mut queue = VecDeque::from([r.source]);
        seen[r.source.0] = true;
        while let Some(n) = queue.pop_front() {
            for arc in instance.outbound(n) {
                if demands.edge_usable(ri, arc.edge) && !std::mem::replace(&mut seen[arc.to.0], true) {
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[r.destination.0] {
            return Err(Error::NoFeasiblePath {
                request: r.id,
                blocked: blocked_edges(instance, demands, ri),
            });
        }
    }
    Ok(())
}

/// Human-readable list of (edge, requirement) pairs a request cannot meet.
pub(crate) fn blocked_edges(instance: &NetworkInstance, demands: &DemandTable, request: usize) -> String {
    let r = &instance.requests()[request];
    let mut parts = Vec::new();
    for (ei, e) in instance.edges().iter().enumerate() {
        for (si, s) in r.scenarios.iter().enumerate() {
            if !demands.get(request, ei, si).is_reachable() {
                parts.push(format!("edge {ei} ({}-{}) at req {}", e.u, e.v, s.requirement));
                break;
            }
        }
    }
    if parts.is_empty() {
        "none".into()
    } else {
        parts.join(", ")
    }
}

/// Every combination of scenario indices, last position varying fastest.
pub(crate) fn scenario_combinations(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |s| {
                    let mut next = prefix.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    out
}

struct Builder<'a> {
    instance: &'a NetworkInstance,
    options: ModelOptions,
    demands: DemandTable,
    arcs: Vec<Arc>,
    variables: Vec<Variable>,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

impl<'a> Builder<'a> {
    fn new(instance: &'a NetworkInstance, options: ModelOptions, demands: DemandTable) -> Self {
        let mut arcs: Vec<Arc> = instance.nodes().flat_map(|n| instance.outbound(n).iter().copied()).collect();
        arcs.sort();
        Builder {
            instance,
            options,
            demands,
            arcs,
            variables: Vec::new(),
            objective: Vec::new(),
            rows: Vec::new(),
        }
    }

    fn var(&mut self, kind: VarKind, name: String, upper: u32, cost: f64) -> usize {
        self.variables.push(Variable { kind, name, upper });
        self.objective.push(cost);
        self.variables.len() - 1
    }

    fn row(&mut self, family: Constraint, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(Row {
            family,
            name,
            terms,
            sense,
            rhs,
        });
    }

    fn build(mut self) -> SpModel {
        let inst = self.instance;
        let costs = inst.costs().clone();
        let requests = inst.requests();
        let num_edges = inst.edges().len();

        // x[r][arc]
        let mut route = vec![Vec::new(); requests.len()];
        for (ri, r) in requests.iter().enumerate() {
            for a in 0..self.arcs.len() {
                let arc = self.arcs[a];
                let cost = if self.options.per_pair_node_cost { 0.0 } else { costs.node_cost(arc.to) };
                let v = self.var(VarKind::Route, format!("x[{},{},r{}]", arc.from, arc.to, r.id), 1, cost);
                route[ri].push(v);
            }
        }

        let mut reserved = vec![Vec::new(); requests.len()];
        for (ri, r) in requests.iter().enumerate() {
            for ei in 0..num_edges {
                let e = inst.edge(ei);
                let v = self.var(VarKind::Reserved, format!("yr[e{ei},r{}]", r.id), e.cap_reserved, costs.reserve_per_pair);
                reserved[ri].push(v);
            }
        }

        if self.options.per_pair_node_cost {
            // w[arc,r] = x[arc,r] * yr[edge,r], priced at the entered node
            for (ri, r) in requests.iter().enumerate() {
                let mut per_edge: Vec<Vec<(usize, f64)>> = vec![Vec::new(); num_edges];
                for a in 0..self.arcs.len() {
                    let arc = self.arcs[a];
                    let cap = inst.edge(arc.edge).cap_reserved;
                    let w = self.var(VarKind::ArcPairs, format!("w[{},{},r{}]", arc.from, arc.to, r.id), cap, costs.node_cost(arc.to));
                    self.row(Constraint::IdleLink, format!("arc_pairs_link[{},{},r{}]", arc.from, arc.to, r.id), vec![(w, 1.0), (route[ri][a], -(cap as f64))], Sense::Le, 0.0);
                    per_edge[arc.edge].push((w, 1.0));
                }
                for (ei, mut terms) in per_edge.into_iter().enumerate() {
                    terms.push((reserved[ri][ei], -1.0));
                    self.row(Constraint::IdleLink, format!("arc_pairs[e{ei},r{}]", r.id), terms, Sense::Eq, 0.0);
                }
            }
        }

        self.flow_rows(&route);

        // link reservation to route use and share capacity between requests
        for ei in 0..num_edges {
            let e = inst.edge(ei).clone();
            let arc_ids: Vec<usize> = (0..self.arcs.len()).filter(|&a| self.arcs[a].edge == ei).collect();
            for (ri, r) in requests.iter().enumerate() {
                let mut terms = vec![(reserved[ri][ei], 1.0)];
                terms.extend(arc_ids.iter().map(|&a| (route[ri][a], -(e.cap_reserved as f64))));
                self.row(Constraint::IdleLink, format!("reserve_link[e{ei},r{}]", r.id), terms, Sense::Le, 0.0);
            }
            let terms = (0..requests.len()).map(|ri| (reserved[ri][ei], 1.0)).collect();
            self.row(Constraint::ReserveCapacity, format!("reserve_cap[e{ei}]"), terms, Sense::Le, e.cap_reserved as f64);
        }

        if self.options.joint_scenarios {
            self.joint_recourse(&route, &reserved);
        } else {
            self.independent_recourse(&route, &reserved);
        }

        SpModel {
            options: self.options,
            arcs: self.arcs,
            demands: self.demands,
            variables: self.variables,
            rows: self.rows,
            objective: self.objective,
        }
    }

    fn flow_rows(&mut self, route: &[Vec<usize>]) {
        let inst = self.instance;
        for (ri, r) in inst.requests().iter().enumerate() {
            for n in inst.nodes() {
                let out: Vec<usize> = (0..self.arcs.len()).filter(|&a| self.arcs[a].from == n).collect();
                let inc: Vec<usize> = (0..self.arcs.len()).filter(|&a| self.arcs[a].to == n).collect();
                let net = |sign: f64| -> Vec<(usize, f64)> {
                    out.iter()
                        .map(|&a| (route[ri][a], sign))
                        .chain(inc.iter().map(|&a| (route[ri][a], -sign)))
                        .collect()
                };
                let (family, terms, rhs) = if n == r.source {
                    (Constraint::FlowSource, net(1.0), 1.0)
                } else if n == r.destination {
                    (Constraint::FlowSink, net(-1.0), 1.0)
                } else {
                    (Constraint::FlowConservation, net(1.0), 0.0)
                };
                let tag = match family {
                    Constraint::FlowSource => "flow_src",
                    Constraint::FlowSink => "flow_dst",
                    _ => "flow",
                };
                self.row(family, format!("{tag}[n{n},r{}]", r.id), terms, Sense::Eq, rhs);
                let terms = out.iter().map(|&a| (route[ri][a], 1.0)).collect();
                self.row(Constraint::SingleOutbound, format!("single_out[n{n},r{}]", r.id), terms, Sense::Le, 1.0);
            }
        }
    }

    /// Terms `k * (x_ij + x_ji)` for the demand row of an edge.
    fn used_terms(&self, route: &[usize], edge: usize, coeff: f64) -> Vec<(usize, f64)> {
        (0..self.arcs.len())
            .filter(|&a| self.arcs[a].edge == edge)
            .map(|a| (route[a], coeff))
            .collect()
    }

    fn demand_row(&mut self, name: String, util: usize, ondemand: usize, route: &[usize], edge: usize, demand: PairDemand) {
        match demand {
            PairDemand::Pairs(k) => {
                let mut terms = vec![(util, 1.0), (ondemand, 1.0)];
                terms.extend(self.used_terms(route, edge, -f64::from(k)));
                self.row(Constraint::FidelityRequirement, name, terms, Sense::Ge, 0.0);
            }
            // no pair count reaches the target: the link is closed to the request
            PairDemand::Unreachable => {
                let terms = self.used_terms(route, edge, 1.0);
                self.row(Constraint::FidelityRequirement, name, terms, Sense::Le, 0.0);
            }
        }
    }

    fn independent_recourse(&mut self, route: &[Vec<usize>], reserved: &[Vec<usize>]) {
        let inst = self.instance;
        let costs = inst.costs().clone();
        for ei in 0..inst.edges().len() {
            let e = inst.edge(ei).clone();
            let mut peaks = Vec::new();
            for (ri, r) in inst.requests().iter().enumerate() {
                let peak = self.var(VarKind::OnDemandPeak, format!("zo[e{ei},r{}]", r.id), e.cap_ondemand, 0.0);
                peaks.push(peak);
                for (si, s) in r.scenarios.iter().enumerate() {
                    let tag = format!("e{ei},r{},w{si}", r.id);
                    let util = self.var(VarKind::Utilized, format!("ye[{tag}]"), e.cap_reserved, s.probability * costs.utilize_per_pair);
                    let ond = self.var(VarKind::OnDemand, format!("yo[{tag}]"), e.cap_ondemand, s.probability * costs.ondemand_per_pair);
                    self.row(Constraint::UtilizationBound, format!("util[{tag}]"), vec![(util, 1.0), (reserved[ri][ei], -1.0)], Sense::Le, 0.0);
                    let demand = self.demands.get(ri, ei, si);
                    self.demand_row(format!("demand[{tag}]"), util, ond, &route[ri], ei, demand);
                    self.row(Constraint::OndemandCapacity, format!("peak[{tag}]"), vec![(ond, 1.0), (peak, -1.0)], Sense::Le, 0.0);
                }
            }
            let terms = peaks.iter().map(|&p| (p, 1.0)).collect();
            self.row(Constraint::OndemandCapacity, format!("ondemand_cap[e{ei}]"), terms, Sense::Le, e.cap_ondemand as f64);
        }
    }

    fn joint_recourse(&mut self, route: &[Vec<usize>], reserved: &[Vec<usize>]) {
        let inst = self.instance;
        let costs = inst.costs().clone();
        let sizes: Vec<usize> = inst.requests().iter().map(|r| r.scenarios.len()).collect();
        let combos = scenario_combinations(&sizes);
        for ei in 0..inst.edges().len() {
            let e = inst.edge(ei).clone();
            for (ci, combo) in combos.iter().enumerate() {
                let p: f64 = combo
                    .iter()
                    .enumerate()
                    .map(|(ri, &s)| inst.requests()[ri].scenarios[s].probability)
                    .product();
                let mut ondemand_terms = Vec::new();
                for (ri, r) in inst.requests().iter().enumerate() {
                    let tag = format!("e{ei},r{},u{ci}", r.id);
                    let util = self.var(VarKind::Utilized, format!("ye[{tag}]"), e.cap_reserved, p * costs.utilize_per_pair);
                    let ond = self.var(VarKind::OnDemand, format!("yo[{tag}]"), e.cap_ondemand, p * costs.ondemand_per_pair);
                    self.row(Constraint::UtilizationBound, format!("util[{tag}]"), vec![(util, 1.0), (reserved[ri][ei], -1.0)], Sense::Le, 0.0);
                    let demand = self.demands.get(ri, ei, combo[ri]);
                    self.demand_row(format!("demand[{tag}]"), util, ond, &route[ri], ei, demand);
                    ondemand_terms.push((ond, 1.0));
                }
                self.row(Constraint::OndemandCapacity, format!("ondemand_cap[e{ei},u{ci}]"), ondemand_terms, Sense::Le, e.cap_ondemand as f64);
            }
        }
    }
}

/// Directed arcs of a node path, or `None` if two consecutive nodes are
/// not adjacent.
pub fn path_arcs(instance: &NetworkInstance, path: &[NodeId]) -> Option<Vec<Arc>> {
    path.windows(2)
        .map(|w| {
            instance.edge_between(w[0], w[1]).map(|edge| Arc {
                from: w[0],
                to: w[1],
                edge,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{builtin_topology, CostParams, EdgeDefaults, Request, Scenario};

    fn line3(scenarios: Vec<Scenario>, defaults: EdgeDefaults) -> NetworkInstance {
        let req = Request {
            id: 0,
            source: NodeId(0),
            destination: NodeId(2),
            scenarios,
        };
        builtin_topology("line(3)")
            .unwrap()
            .into_instance(&defaults, vec![req], CostParams::default())
            .unwrap()
    }

    #[test]
    fn variable_counts_on_line() {
        let inst = line3(vec![Scenario::new(0.85, 0.5), Scenario::new(0.9, 0.5)], EdgeDefaults::default());
        let m = compile(&inst, ModelOptions::default()).unwrap();
        assert_eq!(m.count(VarKind::Route), 4);
        assert_eq!(m.count(VarKind::Reserved), 2);
        assert_eq!(m.count(VarKind::Utilized), 4);
        assert_eq!(m.count(VarKind::OnDemand), 4);
        assert_eq!(m.count(VarKind::OnDemandPeak), 2);
        // one flow row and one single-outbound row per node
        assert_eq!(m.rows_of(Constraint::FlowSource).count(), 1);
        assert_eq!(m.rows_of(Constraint::FlowSink).count(), 1);
        assert_eq!(m.rows_of(Constraint::FlowConservation).count(), 1);
        assert_eq!(m.rows_of(Constraint::SingleOutbound).count(), 3);
        assert_eq!(m.rows_of(Constraint::FidelityRequirement).count(), 4);
    }

    #[test]
    fn threshold_dominates_low_requirements() {
        let grid: Vec<f64> = (0..=19).map(|i| i as f64 * 0.05).filter(|&w| w <= 0.95).collect();
        let inst = line3(Scenario::uniform(&grid), EdgeDefaults::default());
        let m = compile(&inst, ModelOptions::default()).unwrap();
        for e in 0..2 {
            for s in 0..grid.len() {
                assert_eq!(m.demands.get(0, e, s), PairDemand::Pairs(1));
            }
        }
    }

    #[test]
    fn raising_requirement_below_threshold_keeps_demand() {
        let defaults = EdgeDefaults {
            base_fidelity: 0.7,
            ..EdgeDefaults::default()
        };
        let inst = line3(Scenario::uniform(&[0.1, 0.5, 0.79, 0.8]), defaults);
        let d = DemandTable::build(&inst).unwrap();
        let first = d.get(0, 0, 0);
        assert_eq!(first, PairDemand::Pairs(2));
        assert!((0..4).all(|s| d.get(0, 0, s) == first));
    }

    #[test]
    fn unreachable_fidelity_is_structural_infeasibility() {
        let defaults = EdgeDefaults {
            base_fidelity: 0.5,
            ..EdgeDefaults::default()
        };
        let inst = line3(Scenario::certain(0.9), defaults);
        let err = compile(&inst, ModelOptions::default()).unwrap_err();
        match err {
            Error::NoFeasiblePath { request, blocked } => {
                assert_eq!(request, 0);
                assert!(blocked.contains("edge 0"), "{blocked}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn joint_mode_indexes_by_product_space() {
        let inst = line3(vec![Scenario::new(0.85, 0.5), Scenario::new(0.9, 0.5)], EdgeDefaults::default());
        let m = compile(
            &inst,
            ModelOptions {
                joint_scenarios: true,
                ..ModelOptions::default()
            },
        )
        .unwrap();
        assert_eq!(m.count(VarKind::Utilized), 4);
        assert_eq!(m.count(VarKind::OnDemandPeak), 0);
        assert_eq!(m.rows_of(Constraint::OndemandCapacity).count(), 4);
    }

    #[test]
    fn combinations_order() {
        assert_eq!(
            scenario_combinations(&[2, 3]),
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
        assert_eq!(scenario_combinations(&[]), vec![Vec::<usize>::new()]);
    }
}
