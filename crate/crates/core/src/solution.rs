//! Planner output: one route per request, pair counts per used link, and
//! the cost decomposition.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::net::{NetworkInstance, NodeId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub request: i64,
    /// Node sequence from source to destination. Empty when unrouted.
    pub path: Vec<NodeId>,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioRecourse {
    pub utilized: u32,
    pub ondemand: u32,
}

/// Pairs of one request on one link, traversed `from -> to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub request: i64,
    pub edge: usize,
    pub from: NodeId,
    pub to: NodeId,
    pub reserved: u32,
    /// One entry per scenario of the request. Empty in joint-scenario mode,
    /// where recourse lives in [`Solution::joint_recourse`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub recourse: Vec<ScenarioRecourse>,
}

/// Recourse on one link for one combination of scenarios of the requests
/// sharing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointCase {
    /// Scenario index per request in [`JointRecourse::requests`] order.
    pub scenarios: Vec<usize>,
    pub utilized: Vec<u32>,
    pub ondemand: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointRecourse {
    pub edge: usize,
    pub requests: Vec<i64>,
    pub cases: Vec<JointCase>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpObjective {
    pub stage1: f64,
    pub stage2: f64,
    pub total: f64,
}

impl SpObjective {
    pub fn new(stage1: f64, stage2: f64) -> Self {
        SpObjective {
            stage1,
            stage2,
            total: stage1 + stage2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub nodes_explored: u64,
    pub leaves_evaluated: u64,
    /// Some request had more candidate paths than the enumeration bound.
    pub paths_truncated: bool,
    pub timed_out: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub allocations: Vec<Allocation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub joint_recourse: Vec<JointRecourse>,
    pub objective: SpObjective,
    pub stats: SolverStats,
}

/// Pair counts summed over links; stage-2 counts are expectations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTotals {
    pub reserved: u64,
    pub utilized: f64,
    pub ondemand: f64,
}

impl Solution {
    pub fn empty() -> Self {
        Solution::default()
    }

    pub fn reserved_total(&self) -> u64 {
        self.allocations.iter().map(|a| a.reserved as u64).sum()
    }

    pub fn phase_totals(&self, instance: &NetworkInstance) -> PhaseTotals {
        let mut totals = PhaseTotals {
            reserved: self.reserved_total(),
            ..PhaseTotals::default()
        };
        let prob = |id: i64, s: usize| {
            instance
                .requests()
                .iter()
                .find(|r| r.id == id)
                .and_then(|r| r.scenarios.get(s))
                .map_or(0.0, |sc| sc.probability)
        };
        for a in &self.allocations {
            for (s, rec) in a.recourse.iter().enumerate() {
                let p = prob(a.request, s);
                totals.utilized += p * rec.utilized as f64;
                totals.ondemand += p * rec.ondemand as f64;
            }
        }
        for j in &self.joint_recourse {
            for case in &j.cases {
                let p: f64 = j
                    .requests
                    .iter()
                    .zip(&case.scenarios)
                    .map(|(&id, &s)| prob(id, s))
                    .product();
                totals.utilized += p * case.utilized.iter().map(|&u| u as f64).sum::<f64>();
                totals.ondemand += p * case.ondemand.iter().map(|&o| o as f64).sum::<f64>();
            }
        }
        totals
    }
}
