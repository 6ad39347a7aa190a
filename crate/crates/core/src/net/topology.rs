use crate::error::{Error, Result};

use super::{CostParams, Edge, NetworkInstance, NodeId, Request};

/// 14-node, 21-link NSFNET backbone (0-indexed).
const NSFNET_LINKS: [(usize, usize); 21] = [
    (0, 1),
    (0, 2),
    (0, 7),
    (1, 2),
    (1, 3),
    (2, 5),
    (3, 4),
    (3, 10),
    (4, 5),
    (4, 6),
    (5, 9),
    (5, 12),
    (6, 7),
    (7, 8),
    (8, 9),
    (8, 11),
    (8, 13),
    (10, 11),
    (10, 13),
    (11, 12),
    (12, 13),
];

/// Bare graph shape without link parameters or requests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub num_nodes: usize,
    pub links: Vec<(usize, usize)>,
}

/// Link parameters applied to every link of a [`Topology`].
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeDefaults {
    pub base_fidelity: f64,
    pub cap_reserved: u32,
    pub cap_ondemand: u32,
    pub fidelity_threshold: f64,
}

impl Default for EdgeDefaults {
    fn default() -> Self {
        EdgeDefaults {
            base_fidelity: 0.95,
            cap_reserved: 10,
            cap_ondemand: 60,
            fidelity_threshold: 0.8,
        }
    }
}

impl Topology {
    pub fn nsfnet() -> Self {
        Topology {
            num_nodes: 14,
            links: NSFNET_LINKS.to_vec(),
        }
    }

    pub fn line(k: usize) -> Self {
        Topology {
            num_nodes: k,
            links: (1..k).map(|i| (i - 1, i)).collect(),
        }
    }

    /// `rows x cols` lattice, node `r * cols + c`.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut links = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let n = r * cols + c;
                if c + 1 < cols {
                    links.push((n, n + 1));
                }
                if r + 1 < rows {
                    links.push((n, n + cols));
                }
            }
        }
        Topology {
            num_nodes: rows * cols,
            links,
        }
    }

    pub fn edges(&self, defaults: &EdgeDefaults) -> Vec<Edge> {
        self.links
            .iter()
            .map(|&(u, v)| Edge {
                u: NodeId(u),
                v: NodeId(v),
                base_fidelity: defaults.base_fidelity,
                cap_reserved: defaults.cap_reserved,
                cap_ondemand: defaults.cap_ondemand,
                fidelity_threshold: defaults.fidelity_threshold,
            })
            .collect()
    }

    pub fn into_instance(
        self,
        defaults: &EdgeDefaults,
        requests: Vec<Request>,
        costs: CostParams,
    ) -> Result<NetworkInstance> {
        let edges = self.edges(defaults);
        NetworkInstance::new(self.num_nodes, edges, requests, costs)
    }
}

/// Resolves `nsfnet`, `line(k)` or `grid(a,b)`.
pub fn builtin_topology(name: &str) -> Result<Topology> {
    let name = name.trim();
    if name.eq_ignore_ascii_case("nsfnet") {
        return Ok(Topology::nsfnet());
    }
    let unknown = || Error::UnknownTopology(name.to_string());
    let (head, rest) = name.split_once('(').ok_or_else(unknown)?;
    let args = rest.strip_suffix(')').ok_or_else(unknown)?;
    let args: Vec<usize> = args
        .split(',')
        .map(|a| a.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| unknown())?;
    match (head.trim(), args.as_slice()) {
        ("line", &[k]) if k >= 2 => Ok(Topology::line(k)),
        ("grid", &[a, b]) if a >= 1 && b >= 1 && a * b >= 2 => Ok(Topology::grid(a, b)),
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nsfnet_shape() {
        let t = builtin_topology("nsfnet").unwrap();
        assert_eq!(t.num_nodes, 14);
        assert_eq!(t.links.len(), 21);
        let inst = t
            .into_instance(&EdgeDefaults::default(), vec![], CostParams::default())
            .unwrap();
        assert_eq!(inst.num_nodes(), 14);
        // every node has degree at least 2
        assert!(inst.nodes().all(|n| inst.outbound(n).len() >= 2));
    }

    #[test]
    fn line_and_grid() {
        let l = builtin_topology("line(3)").unwrap();
        assert_eq!((l.num_nodes, l.links.len()), (3, 2));
        let g = builtin_topology("grid(2,2)").unwrap();
        assert_eq!((g.num_nodes, g.links.len()), (4, 4));
        let g = builtin_topology("grid(3, 4)").unwrap();
        assert_eq!((g.num_nodes, g.links.len()), (12, 17));
    }

    #[test]
    fn unknown_names() {
        for name in ["ring(4)", "line(1)", "grid(2)", "line(x)", "abilene"] {
            assert!(matches!(builtin_topology(name), Err(Error::UnknownTopology(_))), "{name}");
        }
    }
}
