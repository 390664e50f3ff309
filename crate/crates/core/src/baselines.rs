//! Comparison schedules: SGRR (selection only, given ratios and resource),
//! Nearby association, and the two restricted cooperation modes.

use serde::{Deserialize, Serialize};

use crate::assignment::cloud_terminal_update;
use crate::error::{Error, Result};
use crate::latency::{move_time, resolve};
use crate::radio::{serving_antennas, uplink_rates};
use crate::scenario::{OffloadDecision, Region, Scenario, Transit};
use crate::schedule::{decision_value, repair, run_variant, ScheduleOutput, Variant};
use crate::solvers::SolverConfig;
use crate::utility::system_utility;

/// Given values of SGRR. The ratios fix the edge to cloud proportion; a
/// vehicle that would miss its deadline raises its offloaded total at that
/// proportion, as in the schedule's initial repair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgrrConfig {
    pub alpha_e: f64,
    pub alpha_c: f64,
    /// Skip the repair and keep the given ratios as they are.
    pub literal: bool,
}

impl Default for SgrrConfig {
    fn default() -> Self {
        Self {
            alpha_e: 1.0 / 3.0,
            alpha_c: 1.0 / 3.0,
            literal: false,
        }
    }
}

impl SgrrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_e >= 0.0 && self.alpha_c >= 0.0 && self.alpha_e + self.alpha_c <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "SGRR ratios ({}, {}) leave the simplex",
                self.alpha_e, self.alpha_c
            )));
        }
        Ok(())
    }
}

struct Candidate {
    selection: Option<u32>,
    transit: Option<Transit>,
    ae: f64,
    ac: f64,
    f: f64,
    value: f64,
}

/// SGRR: vehicles in id order each take the RSU that gives them the best
/// utility under the given ratios and an equal resource share, among RSUs
/// with budget left for that share. Overlapping-region vehicles draw an equal
/// share of the pool.
pub fn run_sgrr(scenario: &Scenario, sgrr: &SgrrConfig) -> Result<ScheduleOutput> {
    scenario.validate()?;
    sgrr.validate()?;
    let n = scenario.vehicles.len();
    let n_general = scenario
        .vehicles
        .iter()
        .filter(|v| v.region == Region::General)
        .count();
    let n_overlap = n - n_general;
    let general_total: f64 = scenario.general_rsus().map(|r| r.es_capacity_hz).sum();
    let share_general = if n_general > 0 {
        general_total / n_general as f64
    } else {
        0.0
    };
    let share_pool = match &scenario.pool {
        Some(p) if n_overlap > 0 => p.total_capacity_hz / n_overlap as f64,
        _ => 0.0,
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| scenario.vehicles[i].id);
    let mut remaining: Vec<f64> = scenario.rsus.iter().map(|r| r.es_capacity_hz).collect();
    let mut decisions: Vec<OffloadDecision> = scenario
        .vehicles
        .iter()
        .map(|v| OffloadDecision::local_only(v.id))
        .collect();
    let mut assigned: Vec<Option<u32>> = vec![None; n];

    for &i in &order {
        let v = &scenario.vehicles[i];
        let mut options: Vec<(Option<u32>, f64)> = Vec::new();
        match v.region {
            Region::Overlapping => options.push((None, share_pool)),
            Region::General => {
                for (k, r) in scenario.rsus.iter().enumerate() {
                    if scenario.is_pool_member(r.id) {
                        continue;
                    }
                    let f = if remaining[k] + 1e-9 >= share_general {
                        share_general
                    } else {
                        0.0
                    };
                    options.push((Some(r.id), f));
                }
            }
        }
        let mut best: Option<Candidate> = None;
        for (selection, f) in options {
            let c = evaluate_candidate(scenario, sgrr, &assigned, i, selection, f)?;
            if best.as_ref().is_none_or(|b| c.value > b.value) {
                best = Some(c);
            }
        }
        let Some(c) = best else {
            continue;
        };
        if let Some(id) = c.selection {
            let k = scenario
                .rsus
                .iter()
                .position(|r| r.id == id)
                .ok_or(Error::UnknownRsu(id))?;
            remaining[k] -= c.f;
            assigned[i] = Some(id);
        }
        decisions[i] = OffloadDecision {
            vehicle_id: v.id,
            alpha_e: c.ae,
            alpha_c: c.ac,
            resource: c.f,
            selection: c.selection,
            transit: c.transit,
            feasible: true,
        };
    }

    let mut report = system_utility(&decisions, scenario)?;
    for (d, r) in decisions.iter_mut().zip(&report.vehicles) {
        d.feasible = r.feasible;
    }
    report.trace.clear();
    Ok(ScheduleOutput {
        decisions,
        report,
        outer_iterations: 0,
        converged: true,
    })
}

fn evaluate_candidate(
    scenario: &Scenario,
    sgrr: &SgrrConfig,
    assigned: &[Option<u32>],
    i: usize,
    selection: Option<u32>,
    f: f64,
) -> Result<Candidate> {
    let v = &scenario.vehicles[i];
    let mut sel = assigned.to_vec();
    sel[i] = selection;
    // Interference only from vehicles already placed.
    let mut serving = serving_antennas(scenario, &sel);
    for (k, s) in serving.iter_mut().enumerate() {
        if k != i && assigned[k].is_none() && scenario.vehicles[k].region == Region::General {
            *s = None;
        }
    }
    let rate = uplink_rates(scenario, &serving)?[i];

    let mut transit = None;
    if let Some(id) = selection {
        let rsu = scenario.rsu(id)?;
        if move_time(v, rsu) > 0.0 {
            match cloud_terminal_update(v, rsu, &scenario.radio) {
                Ok((_, t)) => transit = Some(t),
                Err(Error::TaskExpired { .. }) => {
                    return Ok(Candidate {
                        selection,
                        transit: None,
                        ae: 0.0,
                        ac: 0.0,
                        f: 0.0,
                        value: 0.0,
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    let probe = OffloadDecision {
        selection,
        transit: transit.clone(),
        ..OffloadDecision::local_only(v.id)
    };
    let r = resolve(&probe, scenario, v, rate)?;
    let ae0 = if f > 0.0 { sgrr.alpha_e } else { 0.0 };
    let (ae, ac) = if sgrr.literal {
        (ae0, sgrr.alpha_c)
    } else {
        repair(&r, ae0, sgrr.alpha_c, f)
    };
    let f = if ae > 0.0 { f } else { 0.0 };
    let value = decision_value(scenario, i, selection, transit.as_ref(), &r, ae, ac, f);
    Ok(Candidate {
        selection,
        transit,
        ae,
        ac,
        f,
        value,
    })
}

/// Nearby association with the full optimisation afterwards.
pub fn run_nearby(scenario: &Scenario, config: &SolverConfig) -> Result<ScheduleOutput> {
    run_variant(scenario, config, &Variant::nearby(), None)
}

/// Terminal and cloud only.
pub fn run_cloud_terminal(scenario: &Scenario, config: &SolverConfig) -> Result<ScheduleOutput> {
    run_variant(scenario, config, &Variant::cloud_terminal(), None)
}

/// Terminal and edge only, without offloading while moving.
pub fn run_edge_terminal(scenario: &Scenario, config: &SolverConfig) -> Result<ScheduleOutput> {
    run_variant(scenario, config, &Variant::edge_terminal(), None)
}
