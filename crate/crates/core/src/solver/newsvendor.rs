//! Single-link recourse for one request: given a reservation, each scenario
//! is covered by utilizing reserved pairs and buying the shortfall on
//! demand (or the reverse when on-demand pairs are the cheaper ones).

use crate::error::{Error, Result};
use crate::solution::ScenarioRecourse;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemandPoint {
    pub pairs: u32,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewsvendorProfile {
    pub demands: Vec<DemandPoint>,
    pub reserve_cost: f64,
    pub utilize_cost: f64,
    pub ondemand_cost: f64,
    /// Reservation this request may claim on the link.
    pub cap_reserved: u32,
    /// Largest on-demand count this request may use in any scenario.
    pub cap_ondemand: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewsvendorPlan {
    pub reserved: u32,
    pub stage1: f64,
    pub stage2: f64,
    pub expected_cost: f64,
    pub split: Vec<ScenarioRecourse>,
}

/// Cheapest way to cover `demand` pairs with at most `reserved` utilized
/// and at most `ondemand_cap` on-demand pairs.
pub fn fill(demand: u32, reserved: u32, ondemand_cap: u32, utilize_cost: f64, ondemand_cost: f64) -> Option<ScenarioRecourse> {
    let (utilized, ondemand) = if utilize_cost <= ondemand_cost {
        let utilized = demand.min(reserved);
        (utilized, demand - utilized)
    } else {
        let ondemand = demand.min(ondemand_cap);
        (demand - ondemand, ondemand)
    };
    (utilized <= reserved && ondemand <= ondemand_cap).then_some(ScenarioRecourse { utilized, ondemand })
}

impl NewsvendorProfile {
    pub fn max_demand(&self) -> u32 {
        self.demands.iter().map(|d| d.pairs).max().unwrap_or(0)
    }

    /// Cost split and recourse for a fixed reservation, using at most
    /// `ondemand_cap` on-demand pairs per scenario.
    pub fn plan_at(&self, reserved: u32, ondemand_cap: u32) -> Option<NewsvendorPlan> {
        let mut stage2 = 0.0;
        let mut split = Vec::with_capacity(self.demands.len());
        for d in &self.demands {
            let rec = fill(d.pairs, reserved, ondemand_cap, self.utilize_cost, self.ondemand_cost)?;
            stage2 += d.probability * (self.utilize_cost * rec.utilized as f64 + self.ondemand_cost * rec.ondemand as f64);
            split.push(rec);
        }
        let stage1 = self.reserve_cost * reserved as f64;
        Some(NewsvendorPlan {
            reserved,
            stage1,
            stage2,
            expected_cost: stage1 + stage2,
            split,
        })
    }
}

/// Optimal reservation by scanning `0..=cap_reserved`; ties go to the
/// smaller reservation.
pub fn newsvendor_reserve(profile: &NewsvendorProfile) -> Result<NewsvendorPlan> {
    let mut best: Option<NewsvendorPlan> = None;
    for y in 0..=profile.cap_reserved {
        if let Some(plan) = profile.plan_at(y, profile.cap_ondemand) {
            if best.as_ref().is_none_or(|b| plan.expected_cost < b.expected_cost) {
                best = Some(plan);
            }
        }
    }
    best.ok_or_else(|| {
        Error::Infeasible(format!(
            "peak demand {} exceeds {} reservable plus {} on-demand pairs",
            profile.max_demand(),
            profile.cap_reserved,
            profile.cap_ondemand
        ))
    })
}
