//! Candidate routes per request: simple paths in order of hop count, then
//! lexicographic node sequence, over links that can meet every scenario.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{blocked_edges, path_arcs, DemandTable};
use crate::net::{Arc, NetworkInstance, NodeId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidatePath {
    pub nodes: Vec<NodeId>,
    pub arcs: Vec<Arc>,
}

impl CandidatePath {
    pub fn hops(&self) -> usize {
        self.arcs.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSet {
    pub request: usize,
    pub paths: Vec<CandidatePath>,
    /// More paths exist beyond `max_paths`.
    pub truncated: bool,
    /// Edges excluded because some scenario cannot be met on them.
    pub blocked_edges: Vec<usize>,
}

struct Walk<'a> {
    instance: &'a NetworkInstance,
    allowed: Vec<bool>,
    dist: Vec<usize>,
    target: NodeId,
    on_path: Vec<bool>,
    stack: Vec<NodeId>,
    found: Vec<Vec<NodeId>>,
    limit: usize,
}

impl Walk<'_> {
    /// Extend `stack` by exactly `remaining` hops ending at `target`.
    fn dive(&mut self, remaining: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        let here = *self.stack.last().expect("walk starts at the source");
        if here == self.target {
            if remaining == 0 {
                self.found.push(self.stack.clone());
            }
            return;
        }
        if remaining == 0 {
            return;
        }
        for arc in self.instance.outbound(here) {
            let next = arc.to;
            if !self.allowed[arc.edge] || self.on_path[next.0] || self.dist[next.0] > remaining - 1 {
                continue;
            }
            self.on_path[next.0] = true;
            self.stack.push(next);
            self.dive(remaining - 1);
            self.stack.pop();
            self.on_path[next.0] = false;
        }
    }
}

/// Hop distance to `target` over allowed edges; `usize::MAX` if cut off.
fn distances_to(instance: &NetworkInstance, allowed: &[bool], target: NodeId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; instance.num_nodes()];
    dist[target.0] = 0;
    let mut queue = VecDeque::from([target]);
    while let Some(n) = queue.pop_front() {
        for arc in instance.inbound(n) {
            if allowed[arc.edge] && dist[arc.from.0] == usize::MAX {
                dist[arc.from.0] = dist[n.0] + 1;
                queue.push_back(arc.from);
            }
        }
    }
    dist
}

/// Up to `max_paths` simple paths for `request`, shortest first.
pub fn enumerate_paths(instance: &NetworkInstance, demands: &DemandTable, request: usize, max_paths: usize) -> Result<PathSet> {
    let r = &instance.requests()[request];
    let allowed: Vec<bool> = (0..instance.edges().len()).map(|e| demands.edge_usable(request, e)).collect();
    let blocked: Vec<usize> = (0..allowed.len()).filter(|&e| !allowed[e]).collect();
    let dist = distances_to(instance, &allowed, r.destination);

    let mut walk = Walk {
        instance,
        allowed,
        target: r.destination,
        on_path: vec![false; instance.num_nodes()],
        stack: vec![r.source],
        found: Vec::new(),
        limit: max_paths.saturating_add(1),
        dist,
    };
    walk.on_path[r.source.0] = true;
    let shortest = walk.dist[r.source.0];
    if shortest != usize::MAX {
        for hops in shortest..instance.num_nodes() {
            walk.dive(hops);
            if walk.found.len() >= walk.limit {
                break;
            }
        }
    }

    let truncated = walk.found.len() > max_paths;
    walk.found.truncate(max_paths);
    if walk.found.is_empty() {
        return Err(Error::NoFeasiblePath {
            request: r.id,
            blocked: blocked_edges(instance, demands, request),
        });
    }
    let paths = walk
        .found
        .into_iter()
        .map(|nodes| {
            let arcs = path_arcs(instance, &nodes).expect("walk follows links");
            CandidatePath { nodes, arcs }
        })
        .collect();
    Ok(PathSet {
        request,
        paths,
        truncated,
        blocked_edges: blocked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{builtin_topology, CostParams, EdgeDefaults, Request, Scenario};

    fn instance(topology: &str, src: usize, dst: usize) -> NetworkInstance {
        let req = Request {
            id: 0,
            source: NodeId(src),
            destination: NodeId(dst),
            scenarios: Scenario::certain(0.9),
        };
        builtin_topology(topology)
            .unwrap()
            .into_instance(&EdgeDefaults::default(), vec![req], CostParams::default())
            .unwrap()
    }

    /// Plain DFS over all simple paths, no ordering tricks.
    fn all_simple_paths(inst: &NetworkInstance, src: NodeId, dst: NodeId) -> Vec<Vec<NodeId>> {
        fn go(inst: &NetworkInstance, path: &mut Vec<NodeId>, dst: NodeId, out: &mut Vec<Vec<NodeId>>) {
            let here = *path.last().unwrap();
            if here == dst {
                out.push(path.clone());
                return;
            }
            for arc in inst.outbound(here) {
                if !path.contains(&arc.to) {
                    path.push(arc.to);
                    go(inst, path, dst, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(inst, &mut vec![src], dst, &mut out);
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    #[test]
    fn line_has_one_path() {
        let inst = instance("line(3)", 0, 2);
        let d = DemandTable::build(&inst).unwrap();
        let set = enumerate_paths(&inst, &d, 0, 200).unwrap();
        assert_eq!(set.paths.len(), 1);
        assert_eq!(set.paths[0].nodes, vec![NodeId(0), NodeId(1), NodeId(2)]);
        assert!(!set.truncated);
    }

    #[test]
    fn cycle_opposite_corners() {
        let inst = instance("grid(2,2)", 0, 3);
        let d = DemandTable::build(&inst).unwrap();
        let set = enumerate_paths(&inst, &d, 0, 200).unwrap();
        assert_eq!(set.paths.len(), 2);
        assert!(set.paths.iter().all(|p| p.hops() == 2));
        assert_eq!(set.paths[0].nodes, vec![NodeId(0), NodeId(1), NodeId(3)]);
    }

    #[test]
    fn nsfnet_matches_full_enumeration() {
        for (src, dst) in [(0, 13), (3, 9), (6, 11)] {
            let inst = instance("nsfnet", src, dst);
            let d = DemandTable::build(&inst).unwrap();
            let oracle = all_simple_paths(&inst, NodeId(src), NodeId(dst));
            let set = enumerate_paths(&inst, &d, 0, 50).unwrap();
            assert_eq!(set.paths.len(), 50.min(oracle.len()));
            assert_eq!(set.truncated, oracle.len() > 50);
            for (p, o) in set.paths.iter().zip(&oracle) {
                assert_eq!(&p.nodes, o);
                let mut seen = p.nodes.clone();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), p.nodes.len());
            }
            let all = enumerate_paths(&inst, &d, 0, 100_000).unwrap();
            assert_eq!(all.paths.len(), oracle.len());
            assert!(!all.truncated);
        }
    }

    #[test]
    fn blocked_edges_are_avoided() {
        let mut inst = instance("grid(2,2)", 0, 3);
        let mut edges = inst.edges().to_vec();
        // edge 0 is 0-1; make it useless above 0.5
        edges[0].base_fidelity = 0.5;
        inst = NetworkInstance::new(4, edges, inst.requests().to_vec(), CostParams::default()).unwrap();
        let d = DemandTable::build(&inst).unwrap();
        let set = enumerate_paths(&inst, &d, 0, 200).unwrap();
        assert_eq!(set.paths.len(), 1);
        assert_eq!(set.blocked_edges, vec![0]);
        assert_eq!(set.paths[0].nodes, vec![NodeId(0), NodeId(2), NodeId(3)]);
    }
}
