//! QoS utility, per-vehicle and system utility, and constraint checking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latency::processing_delay;
use crate::radio::{serving_antennas, uplink_rates};
use crate::scenario::{EconParams, OffloadDecision, Region, Scenario, TaskSpec};

pub const REL_TOL: f64 = 1e-6;
pub const ABS_TOL: f64 = 1e-9;

/// Whether a violation `v` of a constraint with natural scale `scale` is within
/// tolerance.
pub fn within_tol(v: f64, scale: f64) -> bool {
    v <= REL_TOL * scale.abs() + ABS_TOL
}

pub fn qos_utility(delay: f64, econ: &EconParams) -> Result<f64> {
    let arg = 1.0 + econ.qos_shift - delay;
    if !(arg > 0.0) {
        return Err(Error::QosDomain(arg));
    }
    Ok(econ.qos_weight * arg.log2())
}

/// CPU cycles the vehicle pays for: everything sent to the edge or cloud,
/// including data pre-offloaded to the cloud while moving.
pub fn offloaded_cycles(decision: &OffloadDecision, task: &TaskSpec) -> f64 {
    match &decision.transit {
        Some(t) => {
            let residual = (task.data_bits - t.local_bits - t.cloud_bits).max(0.0);
            ((decision.alpha_e + decision.alpha_c) * residual + t.cloud_bits) * task.cycles_per_bit
        }
        None => (decision.alpha_e + decision.alpha_c) * task.cycles(),
    }
}

pub fn profit(decision: &OffloadDecision, task: &TaskSpec, econ: &EconParams) -> f64 {
    econ.profit_weight
        * (econ.vehicle_price * offloaded_cycles(decision, task)
            - econ.server_price * (decision.resource + econ.cloud_cps))
}

pub fn vehicle_utility(
    decision: &OffloadDecision,
    delay: f64,
    task: &TaskSpec,
    econ: &EconParams,
) -> Result<f64> {
    Ok(profit(decision, task, econ) + qos_utility(delay, econ)?)
}

/// Largest violation of each constraint family, plus per-vehicle verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ConstraintReport {
    /// Seconds past the deadline.
    pub deadline: f64,
    /// Amount by which `alpha_e + alpha_c` exceeds 1.
    pub ratio_sum: f64,
    /// Amount by which a ratio or the resource leaves its box.
    pub ratio_bounds: f64,
    /// 1 when a vehicle's selection is missing or invalid for its region.
    pub selection: f64,
    /// Cycles/s above a standalone ES budget.
    pub es_budget: f64,
    /// Cycles/s above the pool budget.
    pub pool_budget: f64,
    pub vehicle_ok: Vec<bool>,
    pub delays: Vec<f64>,
}

impl ConstraintReport {
    pub fn all_ok(&self) -> bool {
        self.vehicle_ok.iter().all(|&b| b)
    }

    pub fn max_residual(&self) -> f64 {
        [
            self.deadline,
            self.ratio_sum,
            self.ratio_bounds,
            self.selection,
            self.es_budget,
            self.pool_budget,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Uplink rates for a set of decisions, from their selections.
pub fn rates_for(decisions: &[OffloadDecision], scenario: &Scenario) -> Result<Vec<f64>> {
    let sel: Vec<Option<u32>> = decisions.iter().map(|d| d.selection).collect();
    uplink_rates(scenario, &serving_antennas(scenario, &sel))
}

fn check_lengths(decisions: &[OffloadDecision], scenario: &Scenario) -> Result<()> {
    if decisions.len() != scenario.vehicles.len() {
        return Err(Error::InvalidScenario(format!(
            "{} decisions for {} vehicles",
            decisions.len(),
            scenario.vehicles.len()
        )));
    }
    for (d, v) in decisions.iter().zip(&scenario.vehicles) {
        if d.vehicle_id != v.id {
            return Err(Error::InvalidScenario(format!(
                "decision for vehicle {} is out of order (expected {})",
                d.vehicle_id, v.id
            )));
        }
    }
    Ok(())
}

pub fn check_constraints(
    decisions: &[OffloadDecision],
    scenario: &Scenario,
) -> Result<ConstraintReport> {
    let rates = rates_for(decisions, scenario)?;
    check_constraints_with_rates(decisions, scenario, &rates)
}

/// Constraint check with uplink rates already frozen for the slot.
pub fn check_constraints_with_rates(
    decisions: &[OffloadDecision],
    scenario: &Scenario,
    rates: &[f64],
) -> Result<ConstraintReport> {
    check_lengths(decisions, scenario)?;
    let n = decisions.len();
    let mut rep = ConstraintReport {
        vehicle_ok: vec![true; n],
        delays: vec![f64::INFINITY; n],
        ..Default::default()
    };

    let mut es_load = vec![0.0; scenario.rsus.len()];
    let mut pool_load = 0.0;
    for (i, (d, v)) in decisions.iter().zip(&scenario.vehicles).enumerate() {
        let mut ok = true;

        let sum_excess = (d.alpha_e + d.alpha_c - 1.0).max(0.0);
        let box_excess = (-d.alpha_e).max(-d.alpha_c).max(-d.resource).max(0.0);
        rep.ratio_sum = rep.ratio_sum.max(sum_excess);
        rep.ratio_bounds = rep.ratio_bounds.max(box_excess);
        ok &= within_tol(sum_excess, 1.0) && within_tol(box_excess, 1.0);
        ok &= d.alpha_e.is_finite() && d.alpha_c.is_finite() && d.resource.is_finite();

        let selection_ok = match (v.region, d.selection) {
            (Region::General, Some(j)) => scenario.rsu(j).is_ok() && !scenario.is_pool_member(j),
            (Region::General, None) => false,
            (Region::Overlapping, None) => true,
            (Region::Overlapping, Some(j)) => scenario.is_pool_member(j),
        };
        if !selection_ok {
            rep.selection = 1.0;
            ok = false;
        }
        match (v.region, d.selection) {
            (_, Some(j)) => {
                if let Some(k) = scenario.rsus.iter().position(|r| r.id == j) {
                    es_load[k] += d.resource;
                }
                if v.region == Region::Overlapping {
                    pool_load += d.resource;
                }
            }
            (Region::Overlapping, None) => pool_load += d.resource,
            (Region::General, None) => {}
        }

        if selection_ok {
            match processing_delay(d, scenario, v, rates[i]) {
                Ok(t) => {
                    rep.delays[i] = t;
                    let late = (t - v.task.max_delay).max(0.0);
                    rep.deadline = rep.deadline.max(late);
                    ok &= within_tol(late, v.task.max_delay);
                }
                Err(_) => ok = false,
            }
        }
        ok &= rep.delays[i].is_finite();
        rep.vehicle_ok[i] = ok;
    }

    // Budgets: a violated budget fails every vehicle drawing from it.
    for (k, r) in scenario.rsus.iter().enumerate() {
        let over = (es_load[k] - r.es_capacity_hz).max(0.0);
        rep.es_budget = rep.es_budget.max(over);
        if !within_tol(over, r.es_capacity_hz) {
            for (i, d) in decisions.iter().enumerate() {
                if d.selection == Some(r.id) {
                    rep.vehicle_ok[i] = false;
                }
            }
        }
    }
    if let Some(pool) = &scenario.pool {
        let over = (pool_load - pool.total_capacity_hz).max(0.0);
        rep.pool_budget = over;
        if !within_tol(over, pool.total_capacity_hz) {
            for (i, v) in scenario.vehicles.iter().enumerate() {
                if v.region == Region::Overlapping {
                    rep.vehicle_ok[i] = false;
                }
            }
        }
    }
    Ok(rep)
}

/// One record of the alternating optimisation trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub outer: usize,
    pub middle: usize,
    pub inner: usize,
    pub phase: String,
    pub utility: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleReport {
    pub vehicle_id: u32,
    pub region: Region,
    pub selection: Option<u32>,
    pub alpha_e: f64,
    pub alpha_c: f64,
    pub resource: f64,
    pub delay: f64,
    pub deadline: f64,
    /// Contribution to the system utility (zero when infeasible).
    pub utility: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub total: f64,
    pub infeasible: usize,
    pub vehicles: Vec<VehicleReport>,
    pub constraints: ConstraintReport,
    pub trace: Vec<TraceRecord>,
}

impl UtilityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One CSV row per vehicle.
    pub fn write_vehicle_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "vehicle_id",
            "region",
            "selection",
            "alpha_e",
            "alpha_c",
            "resource",
            "delay",
            "deadline",
            "utility",
            "feasible",
        ])?;
        for v in &self.vehicles {
            out.write_record([
                v.vehicle_id.to_string(),
                format!("{:?}", v.region).to_lowercase(),
                v.selection.map_or(String::new(), |s| s.to_string()),
                v.alpha_e.to_string(),
                v.alpha_c.to_string(),
                v.resource.to_string(),
                v.delay.to_string(),
                v.deadline.to_string(),
                v.utility.to_string(),
                v.feasible.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn system_utility(decisions: &[OffloadDecision], scenario: &Scenario) -> Result<UtilityReport> {
    let rates = rates_for(decisions, scenario)?;
    system_utility_with_rates(decisions, scenario, &rates)
}

/// System utility with uplink rates frozen for the slot. Vehicles that are
/// flagged, violate a constraint or leave the QoS domain contribute zero.
pub fn system_utility_with_rates(
    decisions: &[OffloadDecision],
    scenario: &Scenario,
    rates: &[f64],
) -> Result<UtilityReport> {
    let constraints = check_constraints_with_rates(decisions, scenario, rates)?;
    let mut vehicles = Vec::with_capacity(decisions.len());
    let mut total = 0.0;
    let mut infeasible = 0;
    for (i, (d, v)) in decisions.iter().zip(&scenario.vehicles).enumerate() {
        let delay = constraints.delays[i];
        let u = if d.feasible && constraints.vehicle_ok[i] {
            vehicle_utility(d, delay, &v.task, &scenario.econ).ok()
        } else {
            None
        };
        if u.is_none() {
            infeasible += 1;
        }
        let utility = u.unwrap_or(0.0);
        total += utility;
        vehicles.push(VehicleReport {
            vehicle_id: v.id,
            region: v.region,
            selection: d.selection,
            alpha_e: d.alpha_e,
            alpha_c: d.alpha_c,
            resource: d.resource,
            delay,
            deadline: v.task.max_delay,
            utility,
            feasible: u.is_some(),
        });
    }
    Ok(UtilityReport {
        total,
        infeasible,
        vehicles,
        constraints,
        trace: Vec::new(),
    })
}
