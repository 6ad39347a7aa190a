//! Bell-pair purification: the two-pair recurrence, the chained fidelity
//! reached by spending a number of pairs on one link, and its inverse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of pairs to reach a fidelity target on one link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairDemand {
    Pairs(u32),
    Unreachable,
}

impl PairDemand {
    pub fn pairs(self) -> Option<u32> {
        match self {
            PairDemand::Pairs(k) => Some(k),
            PairDemand::Unreachable => None,
        }
    }

    pub fn is_reachable(self) -> bool {
        matches!(self, PairDemand::Pairs(_))
    }
}

/// Fidelity of one pair distilled from two pairs of fidelity `q1` and `q2`.
///
/// The endpoints are fixed points: a perfect pair stays perfect and a
/// zero-fidelity pair stays at zero. Mixing 0 with 1 is undefined.
pub fn purify_step(q1: f64, q2: f64) -> Result<f64> {
    for q in [q1, q2] {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("fidelity {q} outside [0,1]")));
        }
    }
    let agree = q1 * q2;
    let denom = agree + (1.0 - q1) * (1.0 - q2);
    if denom <= 0.0 {
        return Err(Error::Domain(format!("purify_step({q1}, {q2}) has no defined value")));
    }
    Ok(agree / denom)
}

/// Fidelity after folding `pairs` pairs of fidelity `base` into one.
///
/// Uses `pairs - 1` purification rounds, accumulating left to right.
pub fn chained_fidelity(base: f64, pairs: u32) -> Result<f64> {
    if pairs == 0 {
        return Err(Error::Domain("no pairs, no connection".into()));
    }
    if !(0.0..=1.0).contains(&base) {
        return Err(Error::Domain(format!("fidelity {base} outside [0,1]")));
    }
    let mut acc = base;
    for _ in 1..pairs {
        acc = purify_step(acc, base)?;
    }
    Ok(acc)
}

/// Achieved fidelity for 1..=max_pairs pairs on a link with a fixed base.
#[derive(Clone, Debug, PartialEq)]
pub struct PurificationTable {
    base_fidelity: f64,
    achieved: Vec<f64>,
}

impl PurificationTable {
    pub fn new(base_fidelity: f64, max_pairs: u32) -> Result<Self> {
        let mut achieved = Vec::with_capacity(max_pairs as usize);
        if max_pairs > 0 {
            achieved.push(chained_fidelity(base_fidelity, 1)?);
        }
        for k in 1..max_pairs as usize {
            let next = purify_step(achieved[k - 1], base_fidelity)?;
            achieved.push(next);
        }
        Ok(PurificationTable {
            base_fidelity,
            achieved,
        })
    }

    pub fn base_fidelity(&self) -> f64 {
        self.base_fidelity
    }

    pub fn max_pairs(&self) -> u32 {
        self.achieved.len() as u32
    }

    /// Fidelity reached with `pairs` pairs, for `1 <= pairs <= max_pairs`.
    pub fn achieved(&self, pairs: u32) -> Option<f64> {
        pairs
            .checked_sub(1)
            .and_then(|i| self.achieved.get(i as usize))
            .copied()
    }

    pub fn min_pairs(&self, target: f64) -> PairDemand {
        if target >= 1.0 && self.base_fidelity < 1.0 {
            // rounding can push a long chain to exactly 1.0
            return PairDemand::Unreachable;
        }
        self.achieved
            .iter()
            .position(|&f| f >= target)
            .map_or(PairDemand::Unreachable, |i| PairDemand::Pairs(i as u32 + 1))
    }
}

/// Smallest `k <= cap` with `chained_fidelity(base, k) >= target`.
pub fn min_pairs(base: f64, target: f64, cap: u32) -> Result<PairDemand> {
    if base <= 0.5 && target > base {
        return Ok(PairDemand::Unreachable);
    }
    Ok(PurificationTable::new(base, cap)?.min_pairs(target))
}
