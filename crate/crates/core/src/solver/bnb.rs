//! Depth-first branch-and-bound over one candidate path per request.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::time::Instant;

use crate::net::NodeId;

use super::edge::{edge_table, EdgeTable};
use super::Context;

/// Costs are compared on a micro-dollar grid so that ties resolve by route
/// shape rather than by rounding noise.
pub(crate) fn quantize(cost: f64) -> i64 {
    (cost * 1e6).round() as i64
}

fn prune_slack(incumbent: f64) -> f64 {
    1e-5 + 1e-9 * incumbent.abs()
}

/// Members of an edge: (request index, traversed u -> v).
pub(crate) type EdgeKey = (usize, Vec<(usize, bool)>);

#[derive(Clone, Debug)]
pub(crate) struct Leaf {
    pub cost: f64,
    pub hops: usize,
    /// Candidate index per request (instance order).
    pub choice: Vec<usize>,
    /// Exact reserved total per edge when a global reservation is forced.
    pub forced_totals: Option<Vec<u32>>,
}

impl Leaf {
    /// Cheaper first, then fewer hops, then lexicographic paths.
    pub fn cmp_key(&self, other: &Leaf, ctx: &Context) -> Ordering {
        quantize(self.cost)
            .cmp(&quantize(other.cost))
            .then(self.hops.cmp(&other.hops))
            .then_with(|| {
                let paths = |leaf: &Leaf| -> Vec<Vec<NodeId>> {
                    leaf.choice
                        .iter()
                        .enumerate()
                        .map(|(r, &c)| ctx.candidates[r][c].path.nodes.clone())
                        .collect()
                };
                paths(self).cmp(&paths(other))
            })
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Counters {
    pub nodes: u64,
    pub leaves: u64,
}

pub(crate) struct Shared<'a> {
    pub incumbent: &'a AtomicU64,
    pub timed_out: &'a AtomicBool,
    pub deadline: Option<Instant>,
}

impl Shared<'_> {
    fn incumbent(&self) -> f64 {
        f64::from_bits(self.incumbent.load(AtomicOrdering::Relaxed))
    }

    fn offer(&self, cost: f64) {
        // nonnegative floats order like their bit patterns
        self.incumbent.fetch_min(cost.max(0.0).to_bits(), AtomicOrdering::Relaxed);
    }

    fn expired(&self) -> bool {
        if self.timed_out.load(AtomicOrdering::Relaxed) {
            return true;
        }
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.timed_out.store(true, AtomicOrdering::Relaxed);
            return true;
        }
        false
    }
}

/// `min_t (cost(t) - lambda * t)` per multiplier; `None` if nothing fits.
pub(crate) fn shifted_minima(table: &EdgeTable, lambdas: &[f64]) -> Option<Vec<f64>> {
    lambdas
        .iter()
        .map(|&l| {
            table
                .by_total
                .iter()
                .enumerate()
                .filter_map(|(t, p)| p.as_ref().map(|p| p.cost() - l * t as f64))
                .min_by(f64::total_cmp)
        })
        .collect()
}

pub(crate) struct Priced {
    pub table: EdgeTable,
    pub shifted: Option<Vec<f64>>,
}

pub(crate) struct Search<'a> {
    ctx: &'a Context<'a>,
    shared: &'a Shared<'a>,
    cache: HashMap<EdgeKey, Rc<Priced>>,
    members: Vec<Vec<(usize, bool)>>,
    /// Shifted link cost per multiplier.
    edge_cost: Vec<Vec<f64>>,
    choice: Vec<usize>,
    pub best: Option<Leaf>,
    pub counters: Counters,
}

impl<'a> Search<'a> {
    pub fn new(ctx: &'a Context<'a>, shared: &'a Shared<'a>) -> Self {
        let edges = ctx.instance.edges().len();
        Search {
            ctx,
            shared,
            cache: HashMap::new(),
            members: vec![Vec::new(); edges],
            edge_cost: vec![vec![0.0; ctx.lambdas.len()]; edges],
            choice: vec![usize::MAX; ctx.instance.requests().len()],
            best: None,
            counters: Counters::default(),
        }
    }

    fn table(&mut self, edge: usize) -> Rc<Priced> {
        let key = (edge, self.members[edge].clone());
        if let Some(t) = self.cache.get(&key) {
            return Rc::clone(t);
        }
        let (link, members) = self.ctx.link_members(edge, &self.members[edge]);
        let table = edge_table(&link, &members, None);
        let shifted = shifted_minima(&table, &self.ctx.lambdas);
        let priced = Rc::new(Priced { table, shifted });
        self.cache.insert(key, Rc::clone(&priced));
        priced
    }

    /// Explore the whole tree, optionally pinning the candidate of the
    /// first request in branching order.
    pub fn run(&mut self, pinned: Option<usize>) {
        let partial = vec![0.0; self.ctx.lambdas.len()];
        self.descend(0, &partial, 0.0, pinned);
    }

    fn bound(&self, depth: usize, partial: &[f64]) -> f64 {
        partial
            .iter()
            .zip(&self.ctx.suffix_bound[depth])
            .zip(&self.ctx.lambdas)
            .map(|((p, s), l)| p + s + l * self.ctx.target)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `partial[i]` is node cost plus shifted link cost under multiplier `i`.
    fn descend(&mut self, depth: usize, partial: &[f64], node_total: f64, pinned: Option<usize>) {
        if self.shared.expired() {
            return;
        }
        self.counters.nodes += 1;
        let order = &self.ctx.order;
        if depth == order.len() {
            self.leaf(partial[0], node_total);
            return;
        }
        let r = order[depth];
        let count = self.ctx.candidates[r].len();
        let range: Vec<usize> = match pinned {
            Some(c) => vec![c],
            None => (0..count).collect(),
        };
        for ci in range {
            let cand = &self.ctx.candidates[r][ci];
            let mut next: Vec<f64> = partial.iter().map(|p| p + cand.node_cost).collect();
            let mut touched: Vec<(usize, Vec<f64>)> = Vec::with_capacity(cand.path.arcs.len());
            let mut feasible = true;
            for arc in &cand.path.arcs {
                let e = arc.edge;
                let entry = (r, self.ctx.direction(arc));
                let pos = self.members[e].partition_point(|m| m.0 < r);
                self.members[e].insert(pos, entry);
                let priced = self.table(e);
                match &priced.shifted {
                    Some(shifted) => {
                        for (i, v) in shifted.iter().enumerate() {
                            next[i] += v - self.edge_cost[e][i];
                        }
                        touched.push((e, std::mem::replace(&mut self.edge_cost[e], shifted.clone())));
                    }
                    None => {
                        touched.push((e, self.edge_cost[e].clone()));
                        feasible = false;
                        break;
                    }
                }
            }
            if feasible {
                let bound = self.bound(depth + 1, &next);
                let incumbent = self.shared.incumbent();
                if bound <= incumbent + prune_slack(incumbent) {
                    self.choice[r] = ci;
                    self.descend(depth + 1, &next, node_total + cand.node_cost, None);
                    self.choice[r] = usize::MAX;
                }
            }
            for (e, old) in touched.into_iter().rev() {
                self.edge_cost[e] = old;
                let pos = self.members[e].iter().position(|m| m.0 == r).expect("inserted above");
                self.members[e].remove(pos);
            }
        }
    }

    fn leaf(&mut self, partial: f64, node_total: f64) {
        self.counters.leaves += 1;
        let (cost, forced_totals) = match self.ctx.options.forced_reservation {
            None => (partial, None),
            Some(target) => match self.forced(target) {
                Some((cost, totals)) => (node_total + cost, Some(totals)),
                None => return,
            },
        };
        let hops = self
            .choice
            .iter()
            .enumerate()
            .map(|(r, &c)| self.ctx.candidates[r][c].path.hops())
            .sum();
        let leaf = Leaf {
            cost,
            hops,
            choice: self.choice.clone(),
            forced_totals,
        };
        let better = match &self.best {
            None => true,
            Some(b) => leaf.cmp_key(b, self.ctx) == Ordering::Less,
        };
        if better {
            self.shared.offer(cost);
            self.best = Some(leaf);
        }
    }

    /// Cheapest way to reserve exactly `target` pairs across used edges.
    fn forced(&mut self, target: u64) -> Option<(f64, Vec<u32>)> {
        let used: Vec<usize> = (0..self.members.len()).filter(|&e| !self.members[e].is_empty()).collect();
        let target = usize::try_from(target).ok()?;
        let capacity: usize = used.iter().map(|&e| self.ctx.instance.edge(e).cap_reserved as usize).sum();
        if target > capacity {
            return None;
        }
        // best[n] = (cost, per-used-edge totals)
        let mut best: Vec<Option<(f64, Vec<u32>)>> = vec![None; target + 1];
        best[0] = Some((0.0, Vec::new()));
        for &e in &used {
            let priced = self.table(e);
            let table = &priced.table;
            let mut next: Vec<Option<(f64, Vec<u32>)>> = vec![None; target + 1];
            for (n0, slot) in best.iter().enumerate() {
                let Some((c0, picks)) = slot else { continue };
                for (t, plan) in table.by_total.iter().enumerate() {
                    let Some(plan) = plan else { continue };
                    let n = n0 + t;
                    if n > target {
                        break;
                    }
                    let cand = c0 + plan.cost();
                    if next[n].as_ref().is_none_or(|(c, _)| cand < c - 1e-9) {
                        let mut p = picks.clone();
                        p.push(t as u32);
                        next[n] = Some((cand, p));
                    }
                }
            }
            best = next;
        }
        let (cost, picks) = best[target].take()?;
        let mut totals = vec![0u32; self.members.len()];
        for (&e, t) in used.iter().zip(picks) {
            totals[e] = t;
        }
        Some((cost, totals))
    }
}
