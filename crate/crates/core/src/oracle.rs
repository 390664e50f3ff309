//! Brute-force references for the solvers: uniform grid search, an exhaustive
//! small-instance schedule and enumeration of all matchings.
//!
//! Nothing here shares optimisation code with the solvers; only the delay and
//! utility models are common.

use crate::assignment::{cloud_terminal_update, select_rsus};
use crate::error::{Error, Result};
use crate::latency::{move_time, resolve};
use crate::radio::{serving_antennas, uplink_rates};
use crate::scenario::{OffloadDecision, Region, Scenario, Transit};
use crate::utility::{system_utility, vehicle_utility, within_tol, UtilityReport};

/// Largest problem [`exhaustive_small_schedule`] accepts.
pub const MAX_ORACLE_VEHICLES: usize = 2;
/// Largest side [`brute_force_matching`] accepts.
pub const MAX_BRUTE_FORCE_SIDE: usize = 6;

/// Maximises `objective` over `points` evenly spaced values in
/// `[lower, upper]`. The first point wins ties; NaN never wins.
pub fn grid_search_1d(
    objective: impl Fn(f64) -> f64,
    lower: f64,
    upper: f64,
    points: usize,
) -> Result<(f64, f64)> {
    if points < 2 || !(lower <= upper) {
        return Err(Error::InvalidConfig(format!(
            "grid needs lower <= upper and at least 2 points, got [{lower}, {upper}] with {points}"
        )));
    }
    let step = (upper - lower) / (points - 1) as f64;
    let mut best = (lower, f64::NEG_INFINITY);
    for k in 0..points {
        let x = if k == points - 1 {
            upper
        } else {
            lower + step * k as f64
        };
        let y = objective(x);
        if y > best.1 || (k == 0 && !y.is_nan()) {
            best = (x, y);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSchedule {
    pub decisions: Vec<OffloadDecision>,
    pub report: UtilityReport,
}

impl OracleSchedule {
    pub fn utility(&self) -> f64 {
        self.report.total
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    value: f64,
    ae: f64,
    ac: f64,
    f: f64,
}

/// Best schedule of a scenario with at most two vehicles over a grid of
/// `resolution` points per axis in `alpha_e`, `alpha_c` and the resource.
///
/// Selections default to the distance matching (pooled vehicles draw on the
/// pool); pass `selections` to fix them. Vehicles whose task expires while
/// moving are left local and flagged.
pub fn exhaustive_small_schedule(
    scenario: &Scenario,
    selections: Option<&[Option<u32>]>,
    resolution: usize,
) -> Result<OracleSchedule> {
    scenario.validate()?;
    let n = scenario.vehicles.len();
    if n > MAX_ORACLE_VEHICLES {
        return Err(Error::SizeLimit(format!(
            "exhaustive schedule takes at most {MAX_ORACLE_VEHICLES} vehicles, got {n}"
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig("resolution must be at least 2".into()));
    }
    let selections = match selections {
        Some(s) if s.len() == n => s.to_vec(),
        Some(s) => {
            return Err(Error::InvalidConfig(format!(
                "{} selections for {n} vehicles",
                s.len()
            )));
        }
        None => select_rsus(scenario)?,
    };
    let rates = uplink_rates(scenario, &serving_antennas(scenario, &selections))?;
    let steps = (resolution - 1) as f64;

    let mut tables: Vec<Vec<Cell>> = Vec::with_capacity(n);
    let mut budgets = Vec::with_capacity(n);
    let mut transits: Vec<Option<Transit>> = Vec::with_capacity(n);
    let mut expired = vec![false; n];
    for (i, v) in scenario.vehicles.iter().enumerate() {
        let budget = match (v.region, selections[i]) {
            (_, Some(id)) => scenario.rsu(id)?.es_capacity_hz,
            (Region::Overlapping, None) => {
                scenario.pool.as_ref().map_or(0.0, |p| p.total_capacity_hz)
            }
            (Region::General, None) => return Err(Error::MissingSelection { vehicle: v.id }),
        };
        budgets.push(budget);
        let mut transit = None;
        if let (Region::General, Some(id)) = (v.region, selections[i]) {
            let rsu = scenario.rsu(id)?;
            if move_time(v, rsu) > 0.0 {
                match cloud_terminal_update(v, rsu, &scenario.radio) {
                    Ok((_, t)) => transit = Some(t),
                    Err(Error::TaskExpired { .. }) => expired[i] = true,
                    Err(e) => return Err(e),
                }
            }
        }
        transits.push(transit);
        let mut table = vec![
            Cell {
                value: 0.0,
                ae: 0.0,
                ac: 0.0,
                f: 0.0
            };
            resolution
        ];
        if !expired[i] {
            let probe = OffloadDecision {
                selection: selections[i],
                transit: transits[i].clone(),
                ..OffloadDecision::local_only(v.id)
            };
            let r = resolve(&probe, scenario, v, rates[i])?;
            let deadline = r.view.deadline + r.transit_time;
            for (k, cell) in table.iter_mut().enumerate() {
                let f = budget * k as f64 / steps;
                let mut best = Cell {
                    value: f64::NEG_INFINITY,
                    ae: 0.0,
                    ac: 0.0,
                    f,
                };
                for a in 0..resolution {
                    let ae = a as f64 / steps;
                    if ae > 0.0 && f == 0.0 {
                        break;
                    }
                    for c in 0..resolution - a {
                        let ac = c as f64 / steps;
                        let delay = r.delay(ae, ac, f);
                        if !within_tol((delay - deadline).max(0.0), deadline) {
                            continue;
                        }
                        let d = OffloadDecision {
                            vehicle_id: v.id,
                            alpha_e: ae,
                            alpha_c: ac,
                            resource: f,
                            selection: selections[i],
                            transit: transits[i].clone(),
                            feasible: true,
                        };
                        if let Ok(u) = vehicle_utility(&d, delay, &v.task, &scenario.econ) {
                            if u > best.value {
                                best = Cell {
                                    value: u,
                                    ae,
                                    ac,
                                    f,
                                };
                            }
                        }
                    }
                }
                *cell = if best.value.is_finite() {
                    best
                } else {
                    Cell {
                        value: 0.0,
                        ae: 0.0,
                        ac: 0.0,
                        f: 0.0,
                    }
                };
            }
        }
        tables.push(table);
    }

    // Pick one grid cell per vehicle; two vehicles in the same budget group
    // share it.
    let same_group = n == 2 && selections[0] == selections[1];
    let mut pick = vec![0usize; n];
    if same_group {
        let budget = budgets[0];
        let mut best = f64::NEG_INFINITY;
        for k0 in 0..resolution {
            for k1 in 0..resolution {
                let used = tables[0][k0].f + tables[1][k1].f;
                if used > budget * (1.0 + 1e-12) {
                    continue;
                }
                let u = tables[0][k0].value + tables[1][k1].value;
                if u > best {
                    best = u;
                    pick = vec![k0, k1];
                }
            }
        }
    } else {
        for i in 0..n {
            let mut best = f64::NEG_INFINITY;
            for (k, c) in tables[i].iter().enumerate() {
                if c.value > best {
                    best = c.value;
                    pick[i] = k;
                }
            }
        }
    }

    let decisions: Vec<OffloadDecision> = scenario
        .vehicles
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let c = tables[i][pick[i]];
            OffloadDecision {
                vehicle_id: v.id,
                alpha_e: c.ae,
                alpha_c: c.ac,
                resource: if c.ae > 0.0 { c.f } else { 0.0 },
                selection: selections[i],
                transit: transits[i].clone(),
                feasible: !expired[i],
            }
        })
        .collect();
    let mut report = system_utility(&decisions, scenario)?;
    let mut decisions = decisions;
    for (d, r) in decisions.iter_mut().zip(&report.vehicles) {
        d.feasible = r.feasible;
    }
    report.trace.clear();
    Ok(OracleSchedule { decisions, report })
}

/// Minimum-weight assignment of every row to a distinct column by
/// enumeration. Ties go to the lexicographically first assignment.
pub fn brute_force_matching(weights: &[Vec<f64>]) -> Result<(Vec<usize>, f64)> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows > MAX_BRUTE_FORCE_SIDE || cols > MAX_BRUTE_FORCE_SIDE {
        return Err(Error::SizeLimit(format!(
            "brute-force matching takes at most {MAX_BRUTE_FORCE_SIDE}x{MAX_BRUTE_FORCE_SIDE}, got {rows}x{cols}"
        )));
    }
    if weights.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidConfig("ragged weight matrix".into()));
    }
    if rows > cols {
        return Err(Error::InfeasibleMatching { rows, slots: cols });
    }

    fn walk(
        w: &[Vec<f64>],
        row: usize,
        used: &mut [bool],
        current: &mut Vec<usize>,
        total: f64,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        if row == w.len() {
            if best.as_ref().is_none_or(|(_, b)| total < *b) {
                *best = Some((current.clone(), total));
            }
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                current.push(c);
                walk(w, row + 1, used, current, total + w[row][c], best);
                current.pop();
                used[c] = false;
            }
        }
    }

    let mut best = None;
    walk(
        weights,
        0,
        &mut vec![false; cols],
        &mut Vec::with_capacity(rows),
        0.0,
        &mut best,
    );
    Ok(best.unwrap_or((Vec::new(), 0.0)))
}
