//! Exact allocation of one link's reserved and on-demand capacity among the
//! requests routed over it.
//!
//! The result is tabulated by the exact number of pairs reserved on the
//! link, so that a global reservation target can be met by combining links.

use crate::model::scenario_combinations;
use crate::solution::ScenarioRecourse;

use super::newsvendor::{fill, DemandPoint, NewsvendorProfile};

const TIE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Member {
    pub demands: Vec<DemandPoint>,
    pub reserve_cost: f64,
}

impl Member {
    fn max_demand(&self) -> u32 {
        self.demands.iter().map(|d| d.pairs).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct LinkParams {
    pub cap_reserved: u32,
    pub cap_ondemand: u32,
    pub utilize_cost: f64,
    pub ondemand_cost: f64,
    pub joint: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct EdgePlan {
    pub stage1: f64,
    pub stage2: f64,
    pub reserved: Vec<u32>,
    /// Per-member on-demand allowance; unused in joint mode.
    pub shares: Vec<u32>,
}

impl EdgePlan {
    pub fn cost(&self) -> f64 {
        self.stage1 + self.stage2
    }
}

/// Best plan for each exact reserved total `0..=cap_reserved`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct EdgeTable {
    pub by_total: Vec<Option<EdgePlan>>,
}

impl EdgeTable {
    /// Cheapest plan; ties go to the smaller reserved total.
    pub fn best(&self) -> Option<(u32, &EdgePlan)> {
        let mut best: Option<(u32, &EdgePlan)> = None;
        for (t, plan) in self.by_total.iter().enumerate() {
            if let Some(plan) = plan {
                if best.is_none_or(|(_, b)| plan.cost() < b.cost() - TIE) {
                    best = Some((t as u32, plan));
                }
            }
        }
        best
    }

    pub fn at(&self, total: u32) -> Option<&EdgePlan> {
        self.by_total.get(total as usize).and_then(Option::as_ref)
    }
}

fn profile(link: &LinkParams, m: &Member) -> NewsvendorProfile {
    NewsvendorProfile {
        demands: m.demands.clone(),
        reserve_cost: m.reserve_cost,
        utilize_cost: link.utilize_cost,
        ondemand_cost: link.ondemand_cost,
        cap_reserved: link.cap_reserved,
        cap_ondemand: link.cap_ondemand,
    }
}

/// Tabulate the link. With `fixed`, each member's reservation is pinned and
/// only the recourse is optimized.
pub(crate) fn edge_table(link: &LinkParams, members: &[Member], fixed: Option<&[u32]>) -> EdgeTable {
    if link.joint {
        joint_table(link, members, fixed)
    } else {
        independent_table(link, members, fixed)
    }
}

struct Choice {
    reserved: u32,
    share: u32,
    stage1: f64,
    stage2: f64,
}

#[derive(Clone, Copy)]
struct Cell {
    stage1: f64,
    stage2: f64,
    prev: (usize, usize),
    choice: usize,
}

fn independent_table(link: &LinkParams, members: &[Member], fixed: Option<&[u32]>) -> EdgeTable {
    let cr = link.cap_reserved as usize;
    let co = link.cap_ondemand as usize;
    let choices: Vec<Vec<Choice>> = members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let p = profile(link, m);
            let kmax = m.max_demand();
            let ys = match fixed {
                Some(f) => f[i]..=f[i],
                None => 0..=link.cap_reserved,
            };
            let mut out = Vec::new();
            for y in ys {
                let shares: Vec<u32> = if link.utilize_cost <= link.ondemand_cost {
                    // larger allowances cost the same and only crowd others
                    vec![kmax.saturating_sub(y)]
                } else {
                    (0..=kmax.min(link.cap_ondemand)).collect()
                };
                for b in shares {
                    if b > link.cap_ondemand {
                        continue;
                    }
                    if let Some(plan) = p.plan_at(y, b) {
                        out.push(Choice {
                            reserved: y,
                            share: b,
                            stage1: plan.stage1,
                            stage2: plan.stage2,
                        });
                    }
                }
            }
            out
        })
        .collect();

    let idx = |t: usize, o: usize| t * (co + 1) + o;
    let mut layers: Vec<Vec<Option<Cell>>> = Vec::with_capacity(members.len() + 1);
    let mut start = vec![None; (cr + 1) * (co + 1)];
    start[0] = Some(Cell {
        stage1: 0.0,
        stage2: 0.0,
        prev: (0, 0),
        choice: usize::MAX,
    });
    layers.push(start);

    for opts in &choices {
        let prev = layers.last().expect("seeded");
        let mut next: Vec<Option<Cell>> = vec![None; prev.len()];
        // earlier members take reservation first on ties
        for t0 in (0..=cr).rev() {
            for o0 in 0..=co {
                let Some(cell) = prev[idx(t0, o0)] else { continue };
                for (ci, c) in opts.iter().enumerate() {
                    let t = t0 + c.reserved as usize;
                    let o = o0 + c.share as usize;
                    if t > cr || o > co {
                        continue;
                    }
                    let cand = Cell {
                        stage1: cell.stage1 + c.stage1,
                        stage2: cell.stage2 + c.stage2,
                        prev: (t0, o0),
                        choice: ci,
                    };
                    let slot = &mut next[idx(t, o)];
                    if slot.is_none_or(|s| cand.stage1 + cand.stage2 < s.stage1 + s.stage2 - TIE) {
                        *slot = Some(cand);
                    }
                }
            }
        }
        layers.push(next);
    }

    let last = layers.last().expect("seeded");
    let by_total = (0..=cr)
        .map(|t| {
            let mut best: Option<(usize, Cell)> = None;
            for o in 0..=co {
                if let Some(cell) = last[idx(t, o)] {
                    if best.is_none_or(|(_, b)| cell.stage1 + cell.stage2 < b.stage1 + b.stage2 - TIE) {
                        best = Some((o, cell));
                    }
                }
            }
            let (o, cell) = best?;
            let mut reserved = vec![0; members.len()];
            let mut shares = vec![0; members.len()];
            let mut at = (t, o);
            for layer in (1..layers.len()).rev() {
                let c = layers[layer][idx(at.0, at.1)].expect("back-pointer");
                let choice = &choices[layer - 1][c.choice];
                reserved[layer - 1] = choice.reserved;
                shares[layer - 1] = choice.share;
                at = c.prev;
            }
            Some(EdgePlan {
                stage1: cell.stage1,
                stage2: cell.stage2,
                reserved,
                shares,
            })
        })
        .collect();
    EdgeTable { by_total }
}

/// Optimal recourse for one scenario combination; `None` if the on-demand
/// capacity cannot cover the shortfall.
pub(crate) fn joint_case(link: &LinkParams, demands: &[u32], reserved: &[u32]) -> Option<Vec<ScenarioRecourse>> {
    let mut ondemand: Vec<u32> = demands.iter().zip(reserved).map(|(&k, &y)| k.saturating_sub(y)).collect();
    let needed: u64 = ondemand.iter().map(|&o| o as u64).sum();
    if needed > link.cap_ondemand as u64 {
        return None;
    }
    if link.utilize_cost > link.ondemand_cost {
        let mut spare = link.cap_ondemand as u64 - needed;
        for (o, &k) in ondemand.iter_mut().zip(demands) {
            let extra = ((k - *o) as u64).min(spare);
            *o += extra as u32;
            spare -= extra;
        }
    }
    Some(
        demands
            .iter()
            .zip(ondemand)
            .map(|(&k, o)| ScenarioRecourse {
                utilized: k - o,
                ondemand: o,
            })
            .collect(),
    )
}

fn joint_table(link: &LinkParams, members: &[Member], fixed: Option<&[u32]>) -> EdgeTable {
    let sizes: Vec<usize> = members.iter().map(|m| m.demands.len()).collect();
    let cases: Vec<(f64, Vec<u32>)> = scenario_combinations(&sizes)
        .into_iter()
        .map(|combo| {
            let p = combo.iter().zip(members).map(|(&s, m)| m.demands[s].probability).product();
            let k = combo.iter().zip(members).map(|(&s, m)| m.demands[s].pairs).collect();
            (p, k)
        })
        .collect();

    let mut by_total: Vec<Option<EdgePlan>> = vec![None; link.cap_reserved as usize + 1];
    let mut reserved = vec![0u32; members.len()];
    let mut visit = |reserved: &[u32]| {
        let total: u32 = reserved.iter().sum();
        let stage1: f64 = reserved.iter().zip(members).map(|(&y, m)| m.reserve_cost * y as f64).sum();
        let mut stage2 = 0.0;
        for (p, k) in &cases {
            let Some(rec) = joint_case(link, k, reserved) else { return };
            let cost: f64 = rec
                .iter()
                .map(|r| link.utilize_cost * r.utilized as f64 + link.ondemand_cost * r.ondemand as f64)
                .sum();
            stage2 += p * cost;
        }
        let slot = &mut by_total[total as usize];
        if slot.as_ref().is_none_or(|s| stage1 + stage2 < s.cost() - TIE) {
            *slot = Some(EdgePlan {
                stage1,
                stage2,
                reserved: reserved.to_vec(),
                shares: vec![0; reserved.len()],
            });
        }
    };
    fn rec(pos: usize, left: u32, reserved: &mut Vec<u32>, fixed: Option<&[u32]>, visit: &mut dyn FnMut(&[u32])) {
        if pos == reserved.len() {
            visit(reserved);
            return;
        }
        let range = match fixed {
            Some(f) if f[pos] <= left => f[pos]..=f[pos],
            Some(_) => return,
            None => 0..=left,
        };
        for y in range.rev() {
            reserved[pos] = y;
            rec(pos + 1, left - y, reserved, fixed, visit);
        }
        reserved[pos] = 0;
    }
    rec(0, link.cap_reserved, &mut reserved, fixed, &mut visit);
    EdgeTable { by_total }
}

/// Per-scenario recourse of member `i` under an independent-mode plan.
pub(crate) fn member_recourse(link: &LinkParams, member: &Member, reserved: u32, share: u32) -> Vec<ScenarioRecourse> {
    member
        .demands
        .iter()
        .map(|d| fill(d.pairs, reserved, share, link.utilize_cost, link.ondemand_cost).expect("plan was feasible"))
        .collect()
}
