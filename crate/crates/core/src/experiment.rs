//! Experiment runs: single solves, requirement and reservation sweeps,
//! baseline comparison and oracle certification. Output is CSV with a
//! `#`-prefixed header echoing the configuration, or JSON for solutions.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::{random_requests, requirement_support, seeded};
use crate::net::{builtin_topology, CostParams, EdgeDefaults, NetworkInstance, Request, Scenario};
use crate::oracle::{brute_force, OracleLimits, OracleOutcome};
use crate::solution::Solution;
use crate::solver::{solve_evp, solve_perfect_info, solve_sp, SolveOptions};

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    Topology { name: String, defaults: EdgeDefaults },
}

impl InstanceSource {
    pub fn load(&self) -> Result<NetworkInstance> {
        match self {
            InstanceSource::File(path) => NetworkInstance::load(path),
            InstanceSource::Topology { name, defaults } => builtin_topology(name)?.into_instance(defaults, Vec::new(), CostParams::default()),
        }
    }

    fn describe(&self) -> String {
        match self {
            InstanceSource::File(path) => path.display().to_string(),
            InstanceSource::Topology { name, defaults } => format!(
                "{name} (fidelity={} cap_reserved={} cap_ondemand={} threshold={})",
                defaults.base_fidelity, defaults.cap_reserved, defaults.cap_ondemand, defaults.fidelity_threshold
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentKind {
    Solve,
    SweepFidelity { from: f64, to: f64, step: f64 },
    SweepReservation { from: u64, to: u64 },
    CompareModels { requests: Vec<usize>, seed: u64, samples: usize, step: f64, f_max: f64 },
    OracleCheck,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Solve => "solve",
            ExperimentKind::SweepFidelity { .. } => "sweep-fidelity",
            ExperimentKind::SweepReservation { .. } => "sweep-reservation",
            ExperimentKind::CompareModels { .. } => "compare-models",
            ExperimentKind::OracleCheck => "oracle-check",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub instance: InstanceSource,
    pub options: SolveOptions,
}

/// Whether `err` means "this point has no feasible plan".
fn is_infeasible(err: &Error) -> bool {
    matches!(err, Error::Infeasible(_) | Error::NoFeasiblePath { .. })
}

fn point<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if is_infeasible(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Requirements `from, from + step, ...` up to `to`.
pub fn requirement_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::validation("step", format!("{step} must be positive")));
    }
    if !(0.0 <= from && from <= to && to < 1.0) {
        return Err(Error::validation("from/to", format!("need 0 <= from <= to < 1, got {from}..{to}")));
    }
    let mut out = Vec::new();
    for i in 0.. {
        let v = ((from + i as f64 * step) * 1e12).round() / 1e12;
        if v > to + 1e-12 {
            break;
        }
        out.push(v);
    }
    Ok(out)
}

fn with_requirement(instance: &NetworkInstance, requirement: f64) -> Result<NetworkInstance> {
    let requests = instance
        .requests()
        .iter()
        .map(|r| Request {
            scenarios: Scenario::certain(requirement),
            ..r.clone()
        })
        .collect();
    instance.with_requests(requests)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityPoint {
    pub reserved: u64,
    pub utilized: f64,
    pub ondemand: f64,
    /// Used links whose reserved capacity is fully booked.
    pub saturated_links: usize,
    pub total_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityRow {
    pub requirement: f64,
    pub point: Option<FidelityPoint>,
}

/// Links carrying pairs whose reservations sum to their capacity.
pub fn saturated_links(solution: &Solution, instance: &NetworkInstance) -> usize {
    let mut per_edge = vec![(false, 0u64); instance.edges().len()];
    for a in &solution.allocations {
        per_edge[a.edge].0 = true;
        per_edge[a.edge].1 += a.reserved as u64;
    }
    per_edge
        .iter()
        .enumerate()
        .filter(|(e, (used, total))| *used && *total == instance.edge(*e).cap_reserved as u64)
        .count()
}

/// Solve with every request's requirement fixed to each value in turn.
pub fn sweep_fidelity(instance: &NetworkInstance, options: &SolveOptions, requirements: &[f64]) -> Result<Vec<FidelityRow>> {
    requirements
        .par_iter()
        .map(|&requirement| {
            let inst = with_requirement(instance, requirement)?;
            let point = point(solve_sp(&inst, options))?.map(|sol| {
                let totals = sol.phase_totals(&inst);
                FidelityPoint {
                    reserved: totals.reserved,
                    utilized: totals.utilized,
                    ondemand: totals.ondemand,
                    saturated_links: saturated_links(&sol, &inst),
                    total_cost: sol.objective.total,
                }
            });
            Ok(FidelityRow { requirement, point })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReservationRow {
    pub forced: u64,
    /// (stage1, stage2, total)
    pub cost: Option<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReservationSweep {
    pub rows: Vec<ReservationRow>,
    /// Reserved total and cost of the unconstrained optimum.
    pub optimum: Option<(u64, f64)>,
}

/// Solve with the total reservation pinned to each value in `from..=to`.
pub fn sweep_reservation(instance: &NetworkInstance, options: &SolveOptions, from: u64, to: u64) -> Result<ReservationSweep> {
    let capacity: u64 = instance.edges().iter().map(|e| e.cap_reserved as u64).sum();
    if from > to || to > capacity {
        return Err(Error::validation("from/to", format!("need from <= to <= {capacity}, got {from}..{to}")));
    }
    let free = SolveOptions {
        forced_reservation: None,
        ..options.clone()
    };
    let optimum = point(solve_sp(instance, &free))?.map(|s| (s.reserved_total(), s.objective.total));
    let rows = (from..=to)
        .into_par_iter()
        .map(|forced| {
            let opts = SolveOptions {
                forced_reservation: Some(forced),
                ..options.clone()
            };
            let cost = point(solve_sp(instance, &opts))?.map(|s| (s.objective.stage1, s.objective.stage2, s.objective.total));
            Ok(ReservationRow { forced, cost })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReservationSweep { rows, optimum })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub requests: usize,
    pub samples: usize,
    /// Samples where all three models were feasible; the costs average these.
    pub feasible: usize,
    pub cost_sp: f64,
    pub cost_evp: f64,
    pub cost_ws: f64,
}

impl CompareRow {
    /// Relative saving of the stochastic plan over the expected-value plan.
    pub fn gap_percent(&self) -> f64 {
        (self.cost_evp - self.cost_sp) / self.cost_evp * 100.0
    }
}

/// Requirement support used when sampling requests for `instance`.
pub fn compare_support(instance: &NetworkInstance, step: f64, f_max: f64) -> Result<Vec<f64>> {
    let threshold = instance.edges().iter().map(|e| e.fidelity_threshold).fold(0.0, f64::max);
    requirement_support(threshold, step, f_max)
}

fn row_rng(seed: u64, requests: usize) -> ChaCha8Rng {
    let mut rng = seeded(seed);
    rng.set_stream(requests as u64);
    rng
}

/// Expected cost of the stochastic, expected-value and perfect-information
/// plans on seeded random request sets.
pub fn compare_models(instance: &NetworkInstance, options: &SolveOptions, counts: &[usize], seed: u64, samples: usize, support: &[f64]) -> Result<Vec<CompareRow>> {
    if counts.is_empty() || samples == 0 {
        return Err(Error::validation("requests/samples", "need at least one request count and one sample"));
    }
    counts
        .par_iter()
        .map(|&n| {
            let mut rng = row_rng(seed, n);
            let sets: Vec<Vec<Request>> = (0..samples)
                .map(|_| random_requests(&mut rng, instance.num_nodes(), n, support))
                .collect::<Result<_>>()?;
            let mut row = CompareRow {
                requests: n,
                samples,
                feasible: 0,
                cost_sp: 0.0,
                cost_evp: 0.0,
                cost_ws: 0.0,
            };
            for requests in sets {
                let inst = instance.with_requests(requests)?;
                let (Some(sp), Some(evp), Some(ws)) = (
                    point(solve_sp(&inst, options))?,
                    point(solve_evp(&inst, options))?,
                    point(solve_perfect_info(&inst, options))?,
                ) else {
                    continue;
                };
                row.feasible += 1;
                row.cost_sp += sp.objective.total;
                row.cost_evp += evp.objective.total;
                row.cost_ws += ws.expected_cost;
            }
            if row.feasible > 0 {
                let k = row.feasible as f64;
                row.cost_sp /= k;
                row.cost_evp /= k;
                row.cost_ws /= k;
            }
            Ok(row)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub solver_cost: Option<f64>,
    pub oracle_cost: Option<f64>,
    pub feasible_assignments: u64,
}

impl OracleCheck {
    pub fn agrees(&self) -> bool {
        match (self.solver_cost, self.oracle_cost) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
            (None, None) => true,
            _ => false,
        }
    }
}

pub fn oracle_check(instance: &NetworkInstance, options: &SolveOptions) -> Result<OracleCheck> {
    let oracle = brute_force(instance, options.model, &OracleLimits::default())?;
    let solver = point(solve_sp(instance, options))?;
    Ok(OracleCheck {
        solver_cost: solver.map(|s| s.objective.total),
        oracle_cost: oracle.cost(),
        feasible_assignments: match oracle {
            OracleOutcome::Optimal(r) => r.feasible_assignments,
            OracleOutcome::Infeasible => 0,
        },
    })
}

fn header(spec: &ExperimentSpec, extra: &[(&str, String)]) -> String {
    let o = &spec.options;
    let mut out = String::new();
    let _ = writeln!(out, "# command: {}", spec.kind.name());
    let _ = writeln!(out, "# instance: {}", spec.instance.describe());
    let _ = writeln!(
        out,
        "# options: max_paths={} joint_scenarios={} per_pair_node_cost={}",
        o.max_paths, o.model.joint_scenarios, o.model.per_pair_node_cost
    );
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn status<T>(v: &Option<T>) -> &'static str {
    if v.is_some() {
        "ok"
    } else {
        "infeasible"
    }
}

/// Run `spec` and render its output: JSON for `solve`, CSV otherwise.
pub fn run(spec: &ExperimentSpec) -> Result<String> {
    let instance = spec.instance.load()?;
    let options = &spec.options;
    match &spec.kind {
        ExperimentKind::Solve => {
            let sol = solve_sp(&instance, options)?;
            let mut text = serde_json::to_string_pretty(&sol)?;
            text.push('\n');
            Ok(text)
        }
        &ExperimentKind::SweepFidelity { from, to, step } => {
            let grid = requirement_range(from, to, step)?;
            let rows = sweep_fidelity(&instance, options, &grid)?;
            let mut out = header(spec, &[("range", format!("{from}..={to} step {step}"))]);
            out.push_str("requirement,status,reserved,utilized,ondemand,saturated_links,total_cost\n");
            for r in rows {
                let p = r.point.as_ref();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.requirement,
                    status(&r.point),
                    p.map(|p| p.reserved.to_string()).unwrap_or_default(),
                    opt(p.map(|p| p.utilized)),
                    opt(p.map(|p| p.ondemand)),
                    p.map(|p| p.saturated_links.to_string()).unwrap_or_default(),
                    opt(p.map(|p| p.total_cost)),
                );
            }
            Ok(out)
        }
        &ExperimentKind::SweepReservation { from, to } => {
            let sweep = sweep_reservation(&instance, options, from, to)?;
            let optimum = match sweep.optimum {
                Some((n, c)) => format!("reserved={n} total={c}"),
                None => "infeasible".into(),
            };
            let mut out = header(spec, &[("range", format!("{from}..={to}")), ("unconstrained", optimum)]);
            out.push_str("forced_reservation,status,stage1,stage2,total\n");
            for r in sweep.rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.forced,
                    status(&r.cost),
                    opt(r.cost.map(|c| c.0)),
                    opt(r.cost.map(|c| c.1)),
                    opt(r.cost.map(|c| c.2)),
                );
            }
            Ok(out)
        }
        ExperimentKind::CompareModels { requests, seed, samples, step, f_max } => {
            let support = compare_support(&instance, *step, *f_max)?;
            let rows = compare_models(&instance, options, requests, *seed, *samples, &support)?;
            let mut out = header(
                spec,
                &[
                    ("seed", seed.to_string()),
                    ("samples", samples.to_string()),
                    ("requirements", format!("uniform over {} grid points {}..={}", support.len(), support[0], support[support.len() - 1])),
                ],
            );
            out.push_str("n_requests,status,feasible_samples,cost_sp,cost_evp,cost_ws,gap_percent\n");
            for r in rows {
                let ok = r.feasible > 0;
                let num = |v: f64| if ok { v.to_string() } else { String::new() };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.requests,
                    if ok { "ok" } else { "infeasible" },
                    r.feasible,
                    num(r.cost_sp),
                    num(r.cost_evp),
                    num(r.cost_ws),
                    num(r.gap_percent()),
                );
            }
            Ok(out)
        }
        ExperimentKind::OracleCheck => {
            let check = oracle_check(&instance, options)?;
            let mut out = header(spec, &[]);
            out.push_str("status,solver_cost,oracle_cost,feasible_assignments\n");
            let _ = writeln!(
                out,
                "{},{},{},{}",
                if check.agrees() { "agree" } else { "mismatch" },
                opt(check.solver_cost),
                opt(check.oracle_cost),
                check.feasible_assignments
            );
            if !check.agrees() {
                return Err(Error::Infeasible(format!("solver and oracle disagree:\n{out}")));
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NodeId;

    fn line(base: f64) -> NetworkInstance {
        let defaults = EdgeDefaults {
            base_fidelity: base,
            ..EdgeDefaults::default()
        };
        let req = Request {
            id: 0,
            source: NodeId(0),
            destination: NodeId(3),
            scenarios: Scenario::certain(0.9),
        };
        builtin_topology("line(4)").unwrap().into_instance(&defaults, vec![req], CostParams::default()).unwrap()
    }

    #[test]
    fn range_is_inclusive() {
        assert_eq!(requirement_range(0.5, 0.7, 0.1).unwrap(), vec![0.5, 0.6, 0.7]);
        assert!(requirement_range(0.5, 1.0, 0.1).is_err());
        assert!(requirement_range(0.5, 0.7, 0.0).is_err());
    }

    #[test]
    fn fidelity_sweep_plateau_then_ondemand() {
        // base 0.6: 4 pairs reach 0.8, 12 reach 0.99 but only 10 are reservable
        let inst = line(0.6);
        let rows = sweep_fidelity(&inst, &SolveOptions::default(), &[0.5, 0.7, 0.8, 0.99]).unwrap();
        let p: Vec<&FidelityPoint> = rows.iter().map(|r| r.point.as_ref().unwrap()).collect();
        assert_eq!(p[0], p[1]);
        assert_eq!(p[0].reserved, 12);
        assert_eq!(p[3].reserved, 30);
        assert_eq!(p[3].ondemand, 6.0);
        assert_eq!(p[3].saturated_links, 3);
    }

    #[test]
    fn reservation_sweep_meets_optimum() {
        let inst = line(0.75);
        let sweep = sweep_reservation(&inst, &SolveOptions::default(), 0, 9).unwrap();
        let (n, total) = sweep.optimum.unwrap();
        assert_eq!(n, 6);
        let at = sweep.rows[n as usize].cost.unwrap();
        assert!((at.2 - total).abs() < 1e-9);
    }

    #[test]
    fn infeasible_points_are_rows() {
        let mut inst = line(0.6);
        let edges: Vec<_> = inst
            .edges()
            .iter()
            .map(|e| crate::net::Edge {
                cap_ondemand: 0,
                ..e.clone()
            })
            .collect();
        inst = NetworkInstance::new(4, edges, inst.requests().to_vec(), CostParams::default()).unwrap();
        let rows = sweep_fidelity(&inst, &SolveOptions::default(), &[0.9, 0.99]).unwrap();
        assert!(rows[0].point.is_some());
        assert!(rows[1].point.is_none());
    }
}
