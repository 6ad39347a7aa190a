//! Network graph, requests with their scenario spaces, and cost parameters.
//!
//! Edges are undirected. Every edge yields two directed arcs in the
//! adjacency lists, and both arcs draw from the same edge capacities.

mod scenario;
mod topology;

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use scenario::{scenario_grid, Scenario, DEFAULT_F_MAX};
pub use topology::{builtin_topology, EdgeDefaults, Topology};

/// Tolerance on the probability mass of a scenario list.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    #[serde(rename = "fidelity")]
    pub base_fidelity: f64,
    pub cap_reserved: u32,
    pub cap_ondemand: u32,
    #[serde(rename = "threshold")]
    pub fidelity_threshold: f64,
}

impl Edge {
    /// The endpoint opposite `n`, if `n` is an endpoint.
    pub fn other(&self, n: NodeId) -> Option<NodeId> {
        if n == self.u {
            Some(self.v)
        } else if n == self.v {
            Some(self.u)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: i64,
    #[serde(rename = "src")]
    pub source: NodeId,
    #[serde(rename = "dst")]
    pub destination: NodeId,
    pub scenarios: Vec<Scenario>,
}

impl Request {
    /// Probability-weighted mean requirement.
    pub fn mean_requirement(&self) -> f64 {
        self.scenarios
            .iter()
            .map(|s| s.requirement * s.probability)
            .sum()
    }
}

/// Per-node override of the energy and repeater-setup costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeCost {
    pub node: NodeId,
    pub energy: f64,
    pub setup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    #[serde(rename = "energy")]
    pub energy_per_node: f64,
    #[serde(rename = "setup")]
    pub repeater_setup: f64,
    #[serde(rename = "reserve")]
    pub reserve_per_pair: f64,
    #[serde(rename = "utilize")]
    pub utilize_per_pair: f64,
    #[serde(rename = "ondemand")]
    pub ondemand_per_pair: f64,
    #[serde(default, rename = "node_costs", skip_serializing_if = "Vec::is_empty")]
    pub node_overrides: Vec<NodeCost>,
}

impl Default for CostParams {
    /// Reserve 10, utilize 1, on-demand 200, energy 5 and setup 150 per node.
    fn default() -> Self {
        CostParams {
            energy_per_node: 5.0,
            repeater_setup: 150.0,
            reserve_per_pair: 10.0,
            utilize_per_pair: 1.0,
            ondemand_per_pair: 200.0,
            node_overrides: Vec::new(),
        }
    }
}

impl CostParams {
    /// Energy plus setup cost charged when a route enters node `n`.
    pub fn node_cost(&self, n: NodeId) -> f64 {
        match self.node_overrides.iter().find(|o| o.node == n) {
            Some(o) => o.energy + o.setup,
            None => self.energy_per_node + self.repeater_setup,
        }
    }

    fn validate(&self, num_nodes: usize) -> Result<()> {
        let scalars = [
            ("costs.energy", self.energy_per_node),
            ("costs.setup", self.repeater_setup),
            ("costs.reserve", self.reserve_per_pair),
            ("costs.utilize", self.utilize_per_pair),
            ("costs.ondemand", self.ondemand_per_pair),
        ];
        for (field, value) in scalars {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::validation(field, format!("must be a nonnegative number, got {value}")));
            }
        }
        let mut seen = HashSet::new();
        for o in &self.node_overrides {
            if o.node.0 >= num_nodes {
                return Err(Error::validation("costs.node_costs.node", format!("unknown node {}", o.node)));
            }
            if !seen.insert(o.node) {
                return Err(Error::validation("costs.node_costs.node", format!("duplicate override for node {}", o.node)));
            }
            if !(o.energy.is_finite() && o.energy >= 0.0 && o.setup.is_finite() && o.setup >= 0.0) {
                return Err(Error::validation("costs.node_costs", format!("negative cost on node {}", o.node)));
            }
        }
        Ok(())
    }
}

/// Directed view of an undirected edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub edge: usize,
}

/// A validated network with requests. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkInstance {
    num_nodes: usize,
    edges: Vec<Edge>,
    requests: Vec<Request>,
    costs: CostParams,
    outbound: Vec<Vec<Arc>>,
    inbound: Vec<Vec<Arc>>,
}

#[derive(Serialize, Deserialize)]
struct NodeEntry {
    id: NodeId,
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    nodes: Vec<NodeEntry>,
    edges: Vec<Edge>,
    #[serde(default)]
    requests: Vec<Request>,
    #[serde(default)]
    costs: CostParams,
}

impl NetworkInstance {
    pub fn new(num_nodes: usize, edges: Vec<Edge>, requests: Vec<Request>, costs: CostParams) -> Result<Self> {
        validate_edges(num_nodes, &edges)?;
        costs.validate(num_nodes)?;

        let mut outbound = vec![Vec::new(); num_nodes];
        let mut inbound = vec![Vec::new(); num_nodes];
        for (idx, e) in edges.iter().enumerate() {
            for (from, to) in [(e.u, e.v), (e.v, e.u)] {
                let arc = Arc { from, to, edge: idx };
                outbound[from.0].push(arc);
                inbound[to.0].push(arc);
            }
        }
        for list in outbound.iter_mut().chain(inbound.iter_mut()) {
            list.sort();
        }

        let instance = NetworkInstance {
            num_nodes,
            edges,
            requests,
            costs,
            outbound,
            inbound,
        };
        instance.validate_requests()?;
        Ok(instance)
    }

    /// Same network and costs, different request set.
    pub fn with_requests(&self, requests: Vec<Request>) -> Result<Self> {
        let mut next = self.clone();
        next.requests = requests;
        next.validate_requests()?;
        Ok(next)
    }

    pub fn with_costs(&self, costs: CostParams) -> Result<Self> {
        costs.validate(self.num_nodes)?;
        let mut next = self.clone();
        next.costs = costs;
        Ok(next)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        let n = file.nodes.len();
        let mut seen = vec![false; n];
        for entry in &file.nodes {
            let id = entry.id.0;
            if id >= n {
                return Err(Error::validation("nodes.id", format!("ids must be dense in 0..{n}, got {id}")));
            }
            if std::mem::replace(&mut seen[id], true) {
                return Err(Error::validation("nodes.id", format!("duplicate node id {id}")));
            }
        }
        NetworkInstance::new(n, file.edges, file.requests, file.costs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Canonical JSON form: nodes in id order, fields in schema order.
    pub fn to_json_string(&self) -> String {
        let file = InstanceFile {
            nodes: (0..self.num_nodes).map(|i| NodeEntry { id: NodeId(i) }).collect(),
            edges: self.edges.clone(),
            requests: self.requests.clone(),
            costs: self.costs.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.num_nodes).map(NodeId)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn costs(&self) -> &CostParams {
        &self.costs
    }

    /// Outbound arcs of `n`, sorted by destination.
    pub fn outbound(&self, n: NodeId) -> &[Arc] {
        &self.outbound[n.0]
    }

    /// Inbound arcs of `n`, sorted by origin.
    pub fn inbound(&self, n: NodeId) -> &[Arc] {
        &self.inbound[n.0]
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<usize> {
        self.outbound
            .get(a.0)?
            .iter()
            .find(|arc| arc.to == b)
            .map(|arc| arc.edge)
    }

    fn validate_requests(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for (pos, r) in self.requests.iter().enumerate() {
            let field = |name: &str| format!("requests[{pos}].{name}");
            if !ids.insert(r.id) {
                return Err(Error::validation(field("id"), format!("duplicate request id {}", r.id)));
            }
            for (name, node) in [("src", r.source), ("dst", r.destination)] {
                if node.0 >= self.num_nodes {
                    return Err(Error::validation(field(name), format!("unknown node {node}")));
                }
            }
            if r.source == r.destination {
                return Err(Error::validation(field("dst"), "source and destination coincide"));
            }
            if r.scenarios.is_empty() {
                return Err(Error::validation(field("scenarios"), "empty scenario list"));
            }
            let mut mass = 0.0;
            for (k, s) in r.scenarios.iter().enumerate() {
                if !(0.0..=1.0).contains(&s.requirement) {
                    return Err(Error::validation(field("scenarios.req"), format!("requirement {} outside [0,1]", s.requirement)));
                }
                if !(0.0..=1.0).contains(&s.probability) {
                    return Err(Error::validation(field("scenarios.prob"), format!("probability {} outside [0,1]", s.probability)));
                }
                if k > 0 && s.requirement <= r.scenarios[k - 1].requirement {
                    return Err(Error::validation(field("scenarios.req"), "requirements must be strictly ascending"));
                }
                mass += s.probability;
            }
            if (mass - 1.0).abs() > PROBABILITY_TOLERANCE {
                return Err(Error::validation(field("scenarios.prob"), format!("probabilities sum to {mass}, expected 1")));
            }
            if !self.connected(r.source, r.destination) {
                return Err(Error::Unreachable {
                    request: r.id,
                    src: r.source.0,
                    dst: r.destination.0,
                });
            }
        }
        Ok(())
    }

    fn connected(&self, a: NodeId, b: NodeId) -> bool {
        let mut seen = vec![false; self.num_nodes];
        let mut queue = VecDeque::from([a]);
        seen[a.0] = true;
        while let Some(n) = queue.pop_front() {
            if n == b {
                return true;
            }
            for arc in &self.outbound[n.0] {
                if !std::mem::replace(&mut seen[arc.to.0], true) {
                    queue.push_back(arc.to);
                }
            }
        }
        false
    }
}

fn validate_edges(num_nodes: usize, edges: &[Edge]) -> Result<()> {
    let mut pairs = HashSet::new();
    for (pos, e) in edges.iter().enumerate() {
        let field = |name: &str| format!("edges[{pos}].{name}");
        for (name, node) in [("u", e.u), ("v", e.v)] {
            if node.0 >= num_nodes {
                return Err(Error::validation(field(name), format!("unknown node {node}")));
            }
        }
        if e.u == e.v {
            return Err(Error::validation(field("v"), "self-loop"));
        }
        if !pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
            return Err(Error::validation(field("v"), format!("parallel edge {}-{}", e.u, e.v)));
        }
        if !(e.base_fidelity > 0.0 && e.base_fidelity <= 1.0) {
            return Err(Error::validation(field("fidelity"), format!("{} outside (0,1]", e.base_fidelity)));
        }
        if !(0.0..=1.0).contains(&e.fidelity_threshold) {
            return Err(Error::validation(field("threshold"), format!("{} outside [0,1]", e.fidelity_threshold)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line3() -> NetworkInstance {
        let topo = builtin_topology("line(3)").unwrap();
        let req = Request {
            id: 0,
            source: NodeId(0),
            destination: NodeId(2),
            scenarios: vec![Scenario::new(0.9, 1.0)],
        };
        topo.into_instance(&EdgeDefaults::default(), vec![req], CostParams::default())
            .unwrap()
    }

    #[test]
    fn adjacency_mirrors_edges() {
        let inst = line3();
        for n in inst.nodes() {
            assert!(inst.outbound(n).len() <= 2);
            assert_eq!(inst.outbound(n).len(), inst.inbound(n).len());
            for arc in inst.outbound(n) {
                assert_eq!(arc.from, n);
                assert_eq!(inst.edge(arc.edge).other(n), Some(arc.to));
                assert!(inst.inbound(arc.to).iter().any(|a| a.from == n && a.edge == arc.edge));
            }
        }
        assert_eq!(inst.outbound(NodeId(1)).len(), 2);
    }

    #[test]
    fn rejects_bad_probability_mass() {
        let inst = line3();
        let mut r = inst.requests()[0].clone();
        r.scenarios = vec![Scenario::new(0.5, 0.4), Scenario::new(0.9, 0.5)];
        let err = inst.with_requests(vec![r]).unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field.contains("prob")), "{err}");
    }

    #[test]
    fn rejects_unsorted_or_duplicate_requirements() {
        let inst = line3();
        let mut r = inst.requests()[0].clone();
        r.scenarios = vec![Scenario::new(0.9, 0.5), Scenario::new(0.9, 0.5)];
        assert!(inst.with_requests(vec![r]).is_err());
    }

    #[test]
    fn rejects_same_endpoints() {
        let inst = line3();
        let mut r = inst.requests()[0].clone();
        r.destination = r.source;
        assert!(inst.with_requests(vec![r]).is_err());
    }

    #[test]
    fn rejects_disconnected_request() {
        let edges = vec![Edge {
            u: NodeId(0),
            v: NodeId(1),
            base_fidelity: 0.9,
            cap_reserved: 10,
            cap_ondemand: 60,
            fidelity_threshold: 0.8,
        }];
        let req = Request {
            id: 7,
            source: NodeId(0),
            destination: NodeId(2),
            scenarios: vec![Scenario::new(0.8, 1.0)],
        };
        let err = NetworkInstance::new(3, edges, vec![req], CostParams::default()).unwrap_err();
        assert!(matches!(err, Error::Unreachable { request: 7, .. }));
    }

    #[test]
    fn rejects_parallel_edges_and_loops() {
        let e = |u, v| Edge {
            u: NodeId(u),
            v: NodeId(v),
            base_fidelity: 0.9,
            cap_reserved: 1,
            cap_ondemand: 1,
            fidelity_threshold: 0.8,
        };
        assert!(NetworkInstance::new(2, vec![e(0, 1), e(1, 0)], vec![], CostParams::default()).is_err());
        assert!(NetworkInstance::new(2, vec![e(1, 1)], vec![], CostParams::default()).is_err());
    }

    #[test]
    fn json_schema_field_names() {
        let text = line3().to_json_string();
        for key in ["\"nodes\"", "\"fidelity\"", "\"cap_reserved\"", "\"cap_ondemand\"", "\"threshold\"", "\"src\"", "\"dst\"", "\"req\"", "\"prob\"", "\"energy\"", "\"setup\"", "\"reserve\"", "\"utilize\"", "\"ondemand\""] {
            assert!(text.contains(key), "missing {key}");
        }
        assert!(!text.contains("node_costs"));
    }

    #[test]
    fn save_load_is_canonical() {
        let inst = line3();
        let text = inst.to_json_string();
        let back = NetworkInstance::from_json_str(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn rejects_sparse_node_ids() {
        let text = r#"{"nodes":[{"id":0},{"id":2}],"edges":[],"requests":[],"costs":{"energy":5,"setup":150,"reserve":10,"utilize":1,"ondemand":200}}"#;
        assert!(NetworkInstance::from_json_str(text).is_err());
    }

    #[test]
    fn node_cost_overrides() {
        let mut costs = CostParams::default();
        costs.node_overrides.push(NodeCost { node: NodeId(1), energy: 1.0, setup: 2.0 });
        assert_eq!(costs.node_cost(NodeId(1)), 3.0);
        assert_eq!(costs.node_cost(NodeId(0)), 155.0);
    }
}
