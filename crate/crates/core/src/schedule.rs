//! The MSCET schedule: RSU matching, the cloud-terminal phase while vehicles
//! drive into coverage, then alternating optimisation of the cloud ratio
//! (outer loop), edge resource and edge ratio (middle loop) until the system
//! utility settles.
//!
//! Uplink rates are fixed once the selections are known. Every reported
//! utility is computed from the true processing delay, never from the bounds,
//! and the best iterate seen is returned.

use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assignment::{cloud_terminal_update, nearest_rsus, select_rsus};
use crate::error::{Error, Result};
use crate::latency::{move_time, resolve, ResolvedTask};
use crate::radio::{nearest_member, serving_antennas, uplink_rates};
use crate::scenario::{OffloadDecision, Region, Scenario, Transit};
use crate::solvers::{
    ga_solve_alpha_c, ipm_solve_f, kkt_solve_alpha_e, RatioProblem, ResourceItem, SolverConfig,
};
use crate::utility::{
    system_utility_with_rates, vehicle_utility, within_tol, TraceRecord, UtilityReport,
};

/// How general-region vehicles pick their RSU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    /// Minimum total distance matching over capacity slots.
    #[default]
    Matching,
    /// First RSU along the road whose coverage contains the vehicle, else the
    /// nearest RSU ahead of it.
    Nearby,
    /// Nearest RSU by centre distance.
    Nearest,
    /// Given selections, one per vehicle.
    Fixed(Vec<Option<u32>>),
}

/// Which parts of the pipeline are enabled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub selection: SelectionRule,
    pub edge: bool,
    pub cloud: bool,
    /// Process locally and upload to the cloud while moving into coverage.
    pub transit: bool,
    /// Serve overlapping-region vehicles from the pool rather than from their
    /// nearest member ES alone.
    pub pooled: bool,
}

impl Variant {
    pub fn mscet() -> Self {
        Self {
            selection: SelectionRule::Matching,
            edge: true,
            cloud: true,
            transit: true,
            pooled: true,
        }
    }

    pub fn cloud_terminal() -> Self {
        Self {
            edge: false,
            ..Self::mscet()
        }
    }

    pub fn edge_terminal() -> Self {
        Self {
            cloud: false,
            transit: false,
            ..Self::mscet()
        }
    }

    pub fn nearby() -> Self {
        Self {
            selection: SelectionRule::Nearby,
            ..Self::mscet()
        }
    }

    pub fn unpooled() -> Self {
        Self {
            pooled: false,
            ..Self::mscet()
        }
    }
}

/// Initial offloading ratios, one per vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitPoint {
    pub alpha_e: Vec<f64>,
    pub alpha_c: Vec<f64>,
}

impl InitPoint {
    pub fn uniform(n: usize, alpha_e: f64, alpha_c: f64) -> Self {
        Self {
            alpha_e: vec![alpha_e; n],
            alpha_c: vec![alpha_c; n],
        }
    }

    /// Random ratios with `alpha_e + alpha_c <= 1`.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut alpha_e = Vec::with_capacity(n);
        let mut alpha_c = Vec::with_capacity(n);
        for _ in 0..n {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            alpha_e.push(lo);
            alpha_c.push(hi - lo);
        }
        Self { alpha_e, alpha_c }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOutput {
    pub decisions: Vec<OffloadDecision>,
    pub report: UtilityReport,
    pub outer_iterations: usize,
    pub converged: bool,
}

impl ScheduleOutput {
    pub fn utility(&self) -> f64 {
        self.report.total
    }

    /// System utility after each outer iteration.
    pub fn outer_utilities(&self) -> Vec<f64> {
        self.report
            .trace
            .iter()
            .filter(|t| t.phase == "outer")
            .map(|t| t.utility)
            .collect()
    }
}

struct Group {
    capacity: f64,
    members: Vec<usize>,
}

/// Everything fixed before the alternating optimisation starts.
struct Prepared {
    selections: Vec<Option<u32>>,
    transits: Vec<Option<Transit>>,
    rates: Vec<f64>,
    /// `None` for vehicles whose task expired while moving.
    resolved: Vec<Option<ResolvedTask>>,
    groups: Vec<Group>,
    edge: bool,
    cloud: bool,
}

impl Prepared {
    fn active(&self, i: usize) -> bool {
        self.resolved[i]
            .as_ref()
            .is_some_and(|r| r.view.data_bits > 0.0)
    }
}

/// Nearby association: first covering RSU along the road, else the nearest
/// one ahead, else the nearest overall.
pub fn nearby_rsus(scenario: &Scenario) -> Vec<Option<u32>> {
    let nearest = nearest_rsus(scenario);
    scenario
        .vehicles
        .iter()
        .zip(nearest)
        .map(|(v, near)| {
            if v.region != Region::General {
                return None;
            }
            let mut general = scenario.general_rsus();
            general
                .find(|r| (r.position_m - v.position_m).abs() <= r.radius_m)
                .or_else(|| {
                    scenario
                        .general_rsus()
                        .filter(|r| r.position_m >= v.position_m)
                        .min_by(|a, b| a.position_m.total_cmp(&b.position_m))
                })
                .map(|r| r.id)
                .or(near)
        })
        .collect()
}

fn prepare(scenario: &Scenario, variant: &Variant) -> Result<Prepared> {
    scenario.validate()?;
    let n = scenario.vehicles.len();
    let mut selections = match &variant.selection {
        SelectionRule::Matching => select_rsus(scenario)?,
        SelectionRule::Nearby => nearby_rsus(scenario),
        SelectionRule::Nearest => nearest_rsus(scenario),
        SelectionRule::Fixed(s) => {
            if s.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "{} fixed selections for {n} vehicles",
                    s.len()
                )));
            }
            s.clone()
        }
    };
    for (i, v) in scenario.vehicles.iter().enumerate() {
        if v.region == Region::Overlapping {
            selections[i] = if variant.pooled {
                None
            } else {
                nearest_member(scenario, v).map(|r| r.id)
            };
        }
    }
    let rates = uplink_rates(scenario, &serving_antennas(scenario, &selections))?;

    let mut transits = vec![None; n];
    let mut resolved = Vec::with_capacity(n);
    for (i, v) in scenario.vehicles.iter().enumerate() {
        let mut expired = false;
        if v.region == Region::General {
            let id = selections[i].ok_or(Error::MissingSelection { vehicle: v.id })?;
            let rsu = scenario.rsu(id)?;
            if variant.transit && move_time(v, rsu) > 0.0 {
                match cloud_terminal_update(v, rsu, &scenario.radio) {
                    Ok((_, t)) => transits[i] = Some(t),
                    Err(Error::TaskExpired { .. }) => expired = true,
                    Err(e) => return Err(e),
                }
            } else if move_time(v, rsu) >= v.task.max_delay {
                expired = true;
            }
        }
        let probe = OffloadDecision {
            selection: selections[i],
            transit: transits[i].clone(),
            ..OffloadDecision::local_only(v.id)
        };
        resolved.push(if expired {
            None
        } else {
            Some(resolve(&probe, scenario, v, rates[i])?)
        });
    }

    // Budget groups: the pool, or each ES on its own.
    let mut groups: Vec<Group> = Vec::new();
    let mut es_group: Vec<Option<usize>> = vec![None; scenario.rsus.len()];
    let mut pool_group = None;
    for (i, v) in scenario.vehicles.iter().enumerate() {
        let g = match (v.region, selections[i]) {
            (_, Some(id)) => {
                let k = scenario
                    .rsus
                    .iter()
                    .position(|r| r.id == id)
                    .ok_or(Error::UnknownRsu(id))?;
                *es_group[k].get_or_insert_with(|| {
                    groups.push(Group {
                        capacity: scenario.rsus[k].es_capacity_hz,
                        members: Vec::new(),
                    });
                    groups.len() - 1
                })
            }
            (Region::Overlapping, None) => *pool_group.get_or_insert_with(|| {
                groups.push(Group {
                    capacity: scenario.pool.as_ref().map_or(0.0, |p| p.total_capacity_hz),
                    members: Vec::new(),
                });
                groups.len() - 1
            }),
            (Region::General, None) => unreachable!("general vehicles always have a selection"),
        };
        groups[g].members.push(i);
    }

    Ok(Prepared {
        selections,
        transits,
        rates,
        resolved,
        groups,
        edge: variant.edge,
        cloud: variant.cloud,
    })
}

#[derive(Debug, Clone, PartialEq)]
struct State {
    ae: Vec<f64>,
    ac: Vec<f64>,
    f: Vec<f64>,
}

fn decisions(scenario: &Scenario, prep: &Prepared, st: &State) -> Vec<OffloadDecision> {
    scenario
        .vehicles
        .iter()
        .enumerate()
        .map(|(i, v)| OffloadDecision {
            vehicle_id: v.id,
            alpha_e: st.ae[i],
            alpha_c: st.ac[i],
            resource: st.f[i],
            selection: prep.selections[i],
            transit: prep.transits[i].clone(),
            feasible: prep.resolved[i].is_some(),
        })
        .collect()
}

fn evaluate(scenario: &Scenario, prep: &Prepared, st: &State) -> Result<UtilityReport> {
    system_utility_with_rates(&decisions(scenario, prep, st), scenario, &prep.rates)
}

/// Equal split of every budget among the members that use the edge.
fn equal_split(prep: &Prepared, ae: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; ae.len()];
    for g in &prep.groups {
        let users: Vec<usize> = g
            .members
            .iter()
            .copied()
            .filter(|&i| prep.active(i) && ae[i] > 0.0)
            .collect();
        for &i in &users {
            f[i] = g.capacity / users.len() as f64;
        }
    }
    f
}

/// Raises the offloaded share of an infeasible vehicle, keeping its edge to
/// cloud proportion, to the smallest total that meets the deadline. Leaves it
/// at the least-late total when none does.
pub(crate) fn repair(r: &ResolvedTask, ae: f64, ac: f64, f: f64) -> (f64, f64) {
    let deadline = r.view.deadline + r.transit_time;
    let t0 = ae + ac;
    let (pe, pc) = if t0 > 0.0 {
        (ae / t0, ac / t0)
    } else {
        (0.5, 0.5)
    };
    let delay = |t: f64| r.delay(t * pe, t * pc, f);
    if delay(t0) <= deadline {
        return (ae, ac);
    }
    const STEPS: usize = 400;
    let mut best = (delay(t0), t0);
    let mut prev = t0;
    for k in 1..=STEPS {
        let t = t0 + (1.0 - t0) * k as f64 / STEPS as f64;
        let d = delay(t);
        if d <= deadline {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if delay(m) <= deadline {
                    hi = m;
                } else {
                    lo = m;
                }
            }
            return (hi * pe, hi * pc);
        }
        if d < best.0 {
            best = (d, t);
        }
        prev = t;
    }
    (best.1 * pe, best.1 * pc)
}

fn initial_state(scenario: &Scenario, prep: &Prepared, init: &InitPoint) -> Result<State> {
    let n = scenario.vehicles.len();
    if init.alpha_e.len() != n || init.alpha_c.len() != n {
        return Err(Error::InvalidConfig(format!(
            "initial point has {} / {} ratios for {n} vehicles",
            init.alpha_e.len(),
            init.alpha_c.len()
        )));
    }
    let mut ae = vec![0.0; n];
    let mut ac = vec![0.0; n];
    for i in 0..n {
        let (e, c) = (init.alpha_e[i], init.alpha_c[i]);
        if !(e >= 0.0 && c >= 0.0 && e + c <= 1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "initial ratios ({e}, {c}) of vehicle {i} leave the simplex"
            )));
        }
        if prep.active(i) {
            ae[i] = if prep.edge { e } else { 0.0 };
            ac[i] = if prep.cloud { c } else { 0.0 };
            if ae[i] + ac[i] == 0.0 {
                // Give a mode-restricted vehicle something to start from.
                ae[i] = if prep.edge { e.max(c) } else { 0.0 };
                ac[i] = if prep.cloud { e.max(c) } else { 0.0 };
            }
        }
    }
    let f = equal_split(prep, &ae);
    for i in 0..n {
        if let Some(r) = &prep.resolved[i] {
            if prep.active(i) {
                let (e, c) = repair(r, ae[i], ac[i], f[i]);
                ae[i] = e;
                ac[i] = c;
            }
        }
    }
    Ok(State { ae, ac, f })
}

/// Initial point of the schedule: ratios of 1/3 each, the budget split
/// equally, then repaired towards feasibility.
pub fn default_init(scenario: &Scenario) -> Result<Vec<OffloadDecision>> {
    init_decisions(
        scenario,
        &Variant::mscet(),
        &InitPoint::uniform(scenario.vehicles.len(), 1.0 / 3.0, 1.0 / 3.0),
    )
}

/// Repaired initial decisions of `variant` from `init`.
pub fn init_decisions(
    scenario: &Scenario,
    variant: &Variant,
    init: &InitPoint,
) -> Result<Vec<OffloadDecision>> {
    let prep = prepare(scenario, variant)?;
    let st = initial_state(scenario, &prep, init)?;
    let rep = evaluate(scenario, &prep, &st)?;
    let mut ds = decisions(scenario, &prep, &st);
    for (d, v) in ds.iter_mut().zip(&rep.vehicles) {
        d.feasible = v.feasible;
    }
    Ok(ds)
}

fn gain(scenario: &Scenario, r: &ResolvedTask) -> f64 {
    scenario.econ.profit_weight * scenario.econ.vehicle_price * r.view.cycles()
}

fn cs_problem(scenario: &Scenario, r: &ResolvedTask, ae: f64, f: f64) -> RatioProblem {
    let (omega, delta) = r.view.cs_bound(ae, f);
    RatioProblem {
        gain: gain(scenario, r),
        omega,
        delta: delta + r.transit_time + r.transit_tail,
        deadline: r.view.deadline + r.transit_time,
        upper: (1.0 - ae).max(0.0),
    }
}

fn es_problem(scenario: &Scenario, r: &ResolvedTask, ac: f64, f: f64) -> RatioProblem {
    let lambda = scenario.econ.approx_degree;
    let (omega, delta) = r.view.es_bound(ac, f, lambda);
    RatioProblem {
        gain: gain(scenario, r),
        omega,
        delta: delta + (r.transit_time + r.transit_tail) / lambda,
        deadline: r.view.deadline + r.transit_time,
        upper: (1.0 - ac).max(0.0),
    }
}

/// Resource item of one vehicle. With `movable_cloud` the cloud branch is left
/// out of the floor, since a later rebalance can move cloud share back to the
/// edge once it has the resource.
fn resource_item(r: &ResolvedTask, ae: f64, ac: f64, movable_cloud: bool) -> ResourceItem {
    let v = &r.view;
    let cloud = if movable_cloud {
        0.0
    } else {
        v.cloud_delay(ae, ac)
    };
    ResourceItem {
        comm: r.transit_time + v.server_offset + v.edge_comm(ae),
        work: ae * v.cycles(),
        deadline: v.deadline + r.transit_time,
        floor: r.transit_time + v.local_delay(ae, ac).max(cloud).max(r.transit_tail),
    }
}

/// True utility of vehicle `i` at the given decision, zero when late.
#[allow(clippy::too_many_arguments)]
pub(crate) fn decision_value(
    scenario: &Scenario,
    i: usize,
    selection: Option<u32>,
    transit: Option<&Transit>,
    r: &ResolvedTask,
    ae: f64,
    ac: f64,
    f: f64,
) -> f64 {
    let delay = r.delay(ae, ac, f);
    let deadline = r.view.deadline + r.transit_time;
    if !within_tol((delay - deadline).max(0.0), deadline) {
        return 0.0;
    }
    let v = &scenario.vehicles[i];
    let d = OffloadDecision {
        vehicle_id: v.id,
        alpha_e: ae,
        alpha_c: ac,
        resource: f,
        selection,
        transit: transit.cloned(),
        feasible: true,
    };
    vehicle_utility(&d, delay, &v.task, &scenario.econ).unwrap_or(0.0)
}

#[allow(clippy::too_many_arguments)]
fn vehicle_value(
    scenario: &Scenario,
    prep: &Prepared,
    i: usize,
    r: &ResolvedTask,
    ae: f64,
    ac: f64,
    f: f64,
) -> f64 {
    decision_value(
        scenario,
        i,
        prep.selections[i],
        prep.transits[i].as_ref(),
        r,
        ae,
        ac,
        f,
    )
}

/// Cloud ratio step. A vehicle takes the new ratio only when its true utility
/// does not drop; the subproblem works on a bound that can overstate the delay.
fn step_alpha_c(scenario: &Scenario, cfg: &SolverConfig, prep: &Prepared, st: &mut State) {
    if !prep.cloud {
        return;
    }
    let idx: Vec<usize> = (0..st.ae.len()).filter(|&i| prep.active(i)).collect();
    let problems: Vec<RatioProblem> = idx
        .iter()
        .map(|&i| {
            cs_problem(
                scenario,
                prep.resolved[i].as_ref().unwrap(),
                st.ae[i],
                st.f[i],
            )
        })
        .collect();
    let ids: Vec<u32> = idx.iter().map(|&i| scenario.vehicles[i].id).collect();
    let sol = ga_solve_alpha_c(&problems, &ids, &scenario.econ, cfg);
    for (k, &i) in idx.iter().enumerate() {
        let r = prep.resolved[i].as_ref().unwrap();
        let (ae, ac, f) = (st.ae[i], st.ac[i], st.f[i]);
        if vehicle_value(scenario, prep, i, r, ae, sol[k].value, f)
            >= vehicle_value(scenario, prep, i, r, ae, ac, f)
        {
            st.ac[i] = sol[k].value;
        }
    }
}

/// Share of a budget the minimum needs are shrunk to when they do not fit.
const SHRINK_TARGET: f64 = 0.9;

/// Resource step.
///
/// Users whose local or cloud part alone misses the deadline first move their
/// local part to the edge. When a budget cannot cover the minimum needs of its edge users, users that
/// cannot meet their deadline on the edge at all leave it first. If the needs
/// still exceed the budget, then with the cloud available every user's edge
/// ratio is scaled down by a common factor until the needs fit, and the cloud
/// step absorbs the difference next round. Without the cloud the user with the
/// largest need leaves the edge instead.
fn step_resource(
    scenario: &Scenario,
    cfg: &SolverConfig,
    prep: &Prepared,
    st: &mut State,
) -> usize {
    if !prep.edge {
        return 0;
    }
    let movable = cfg.rebalance && prep.cloud;
    let mut iterations = 0;
    for g in &prep.groups {
        // A late local or cloud part cannot be fixed by resource; hand the
        // local part to the edge.
        for &i in &g.members {
            if prep.active(i) && st.ae[i] > 0.0 {
                let it = resource_item(
                    prep.resolved[i].as_ref().unwrap(),
                    st.ae[i],
                    st.ac[i],
                    movable,
                );
                if it.floor > it.deadline {
                    st.ae[i] = (1.0 - st.ac[i]).max(0.0);
                }
            }
        }
        loop {
            let users: Vec<usize> = g
                .members
                .iter()
                .copied()
                .filter(|&i| prep.active(i) && st.ae[i] > 0.0)
                .collect();
            let items: Vec<ResourceItem> = users
                .iter()
                .map(|&i| {
                    resource_item(
                        prep.resolved[i].as_ref().unwrap(),
                        st.ae[i],
                        st.ac[i],
                        movable,
                    )
                })
                .collect();
            match ipm_solve_f(&items, g.capacity, &scenario.econ, cfg) {
                Ok(out) => {
                    iterations = iterations.max(out.iterations);
                    for &i in &g.members {
                        st.f[i] = 0.0;
                    }
                    for (k, &i) in users.iter().enumerate() {
                        st.f[i] = out.f[k];
                    }
                    break;
                }
                Err(Error::InfeasibleBudget { .. }) => {
                    let hopeless: Vec<usize> = users
                        .iter()
                        .zip(&items)
                        .filter(|(_, it)| !it.f_min().is_finite())
                        .map(|(&i, _)| i)
                        .collect();
                    if !hopeless.is_empty() {
                        for i in hopeless {
                            st.ae[i] = 0.0;
                            st.f[i] = 0.0;
                        }
                    } else if prep.cloud {
                        let theta =
                            shrink_factor(prep, st, &users, SHRINK_TARGET * g.capacity, movable);
                        for &i in &users {
                            st.ae[i] *= theta;
                        }
                    } else {
                        let worst = users
                            .iter()
                            .zip(&items)
                            .max_by(|a, b| a.1.f_min().total_cmp(&b.1.f_min()).then(b.0.cmp(a.0)))
                            .map(|(&i, _)| i)
                            .expect("an infeasible budget has users");
                        st.ae[worst] = 0.0;
                        st.f[worst] = 0.0;
                    }
                }
                Err(_) => break,
            }
        }
    }
    iterations
}

/// Largest common factor on the users' edge ratios that brings their summed
/// minimum needs down to `target`.
fn shrink_factor(prep: &Prepared, st: &State, users: &[usize], target: f64, movable: bool) -> f64 {
    let need = |theta: f64| -> f64 {
        users
            .iter()
            .map(|&i| {
                let r = prep.resolved[i].as_ref().unwrap();
                resource_item(r, theta * st.ae[i], st.ac[i], movable).f_min()
            })
            .sum()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if need(m) <= target {
            lo = m;
        } else {
            hi = m;
        }
    }
    lo
}

/// Edge ratio step, with the same acceptance test as the cloud ratio step.
fn step_alpha_e(scenario: &Scenario, prep: &Prepared, st: &mut State) {
    if !prep.edge {
        return;
    }
    let idx: Vec<usize> = (0..st.ae.len()).filter(|&i| prep.active(i)).collect();
    let problems: Vec<RatioProblem> = idx
        .iter()
        .map(|&i| {
            es_problem(
                scenario,
                prep.resolved[i].as_ref().unwrap(),
                st.ac[i],
                st.f[i],
            )
        })
        .collect();
    let sol = kkt_solve_alpha_e(&problems, &scenario.econ);
    for (k, &i) in idx.iter().enumerate() {
        let r = prep.resolved[i].as_ref().unwrap();
        let (ae, ac, f) = (st.ae[i], st.ac[i], st.f[i]);
        let nf = if sol[k].value == 0.0 { 0.0 } else { f };
        if vehicle_value(scenario, prep, i, r, sol[k].value, ac, nf)
            >= vehicle_value(scenario, prep, i, r, ae, ac, f)
        {
            st.ae[i] = sol[k].value;
            st.f[i] = nf;
        }
    }
}

/// Moves share between edge and cloud at a fixed offloaded total, which keeps
/// the profit term, to the split with the smallest delay. A vehicle still late
/// afterwards gets its total raised as in the initial repair.
#[allow(clippy::needless_range_loop)]
fn step_rebalance(scenario: &Scenario, prep: &Prepared, st: &mut State) {
    if !(prep.edge && prep.cloud) {
        return;
    }
    let mut group_of = vec![0; st.ae.len()];
    let mut slack: Vec<f64> = Vec::with_capacity(prep.groups.len());
    for (g, grp) in prep.groups.iter().enumerate() {
        let used: f64 = grp.members.iter().map(|&i| st.f[i]).sum();
        slack.push(grp.capacity - used);
        for &i in &grp.members {
            group_of[i] = g;
        }
    }
    for i in 0..st.ae.len() {
        if !prep.active(i) {
            continue;
        }
        let r = prep.resolved[i].as_ref().unwrap();
        let (t, f) = (st.ae[i] + st.ac[i], st.f[i]);
        let delay = |a: f64| r.delay(a, t - a, f);
        let hi = if f > 0.0 { t } else { 0.0 };
        let (mut lo_s, mut hi_s) = (0.0, hi);
        for _ in 0..100 {
            let m1 = lo_s + (hi_s - lo_s) / 3.0;
            let m2 = hi_s - (hi_s - lo_s) / 3.0;
            if delay(m1) <= delay(m2) {
                hi_s = m2;
            } else {
                lo_s = m1;
            }
        }
        let mut best = (delay(st.ae[i]), st.ae[i]);
        for a in [0.0, 0.5 * (lo_s + hi_s), hi] {
            let d = delay(a);
            if d < best.0 - 1e-12 {
                best = (d, a);
            }
        }
        st.ae[i] = best.1;
        st.ac[i] = t - best.1;
        if st.ae[i] == 0.0 {
            st.f[i] = 0.0;
        }
        let (e, c) = repair(r, st.ae[i], st.ac[i], st.f[i]);
        st.ae[i] = e;
        st.ac[i] = c;
        let (e, c) = shed(r, st.ae[i], st.ac[i], st.f[i]);
        st.ae[i] = e;
        st.ac[i] = c;
        let g = group_of[i];
        let (e, c, fr) = extend(scenario, prep, i, r, st.ae[i], st.ac[i], st.f[i], slack[g]);
        slack[g] -= fr - st.f[i];
        st.ae[i] = e;
        st.ac[i] = c;
        st.f[i] = fr;
    }
}

/// Lowers the offloaded total of a late vehicle, keeping its edge to cloud
/// proportion, to the largest total that meets the deadline. Unchanged when
/// none does.
fn shed(r: &ResolvedTask, ae: f64, ac: f64, f: f64) -> (f64, f64) {
    let deadline = r.view.deadline + r.transit_time;
    let t0 = ae + ac;
    let delay = |t: f64| r.delay(t * ae / t0, t * ac / t0, f);
    if t0 <= 0.0 || delay(t0) <= deadline {
        return (ae, ac);
    }
    const STEPS: usize = 400;
    let mut prev = t0;
    for k in 1..=STEPS {
        let t = t0 * (1.0 - k as f64 / STEPS as f64);
        if delay(t) <= deadline {
            let (mut lo, mut hi) = (t, prev);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if delay(m) <= deadline {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            return (lo * ae / t0, lo * ac / t0);
        }
        prev = t;
    }
    (ae, ac)
}

/// Raises the offloaded total when that pays, e.g. when the local part is what
/// holds the vehicle at its deadline. Tries the fixed edge to cloud proportion
/// and edge-only growth, each with the current resource and with the unused
/// budget of the vehicle's group added.
#[allow(clippy::too_many_arguments)]
fn extend(
    scenario: &Scenario,
    prep: &Prepared,
    i: usize,
    r: &ResolvedTask,
    ae: f64,
    ac: f64,
    f: f64,
    slack: f64,
) -> (f64, f64, f64) {
    let t0 = ae + ac;
    if t0 <= 0.0 || t0 >= 1.0 {
        return (ae, ac, f);
    }
    const STEPS: usize = 200;
    let start = vehicle_value(scenario, prep, i, r, ae, ac, f);
    let mut best = (start, ae, ac, f);
    let fs = [f, f + slack.max(0.0)];
    for k in 1..=STEPS {
        let t = t0 + (1.0 - t0) * k as f64 / STEPS as f64;
        for (e, c) in [(t * ae / t0, t * ac / t0), (t - ac, ac)] {
            for &fr in &fs {
                let fr = if e > 0.0 { fr } else { 0.0 };
                let val = vehicle_value(scenario, prep, i, r, e, c, fr);
                if val > best.0 {
                    best = (val, e, c, fr);
                }
            }
        }
    }
    if best.0 > start + 1e-12 {
        (best.1, best.2, best.3)
    } else {
        (ae, ac, f)
    }
}

pub fn run_mscet(
    scenario: &Scenario,
    config: &SolverConfig,
    init: Option<&InitPoint>,
) -> Result<ScheduleOutput> {
    run_variant(scenario, config, &Variant::mscet(), init)
}

/// Runs the schedule with parts of the pipeline switched by `variant`.
pub fn run_variant(
    scenario: &Scenario,
    config: &SolverConfig,
    variant: &Variant,
    init: Option<&InitPoint>,
) -> Result<ScheduleOutput> {
    config.validate()?;
    let prep = prepare(scenario, variant)?;
    let n = scenario.vehicles.len();
    let default = InitPoint::uniform(n, 1.0 / 3.0, 1.0 / 3.0);
    let mut st = initial_state(scenario, &prep, init.unwrap_or(&default))?;

    let mut trace = Vec::new();
    let mut report = evaluate(scenario, &prep, &st)?;
    let mut record = |outer, middle, inner, phase: &str, rep: &UtilityReport| {
        trace.push(TraceRecord {
            outer,
            middle,
            inner,
            phase: phase.to_string(),
            utility: rep.total,
            max_residual: rep.constraints.max_residual(),
        });
    };
    record(0, 0, 0, "init", &report);
    let mut best = (report.total, st.clone());

    let tol = config.outer_tolerance;
    let mut prev_outer = report.total;
    let mut converged = false;
    let mut outer_iterations = 0;
    for s in 1..=config.max_outer_iters {
        outer_iterations = s;
        step_alpha_c(scenario, config, &prep, &mut st);
        report = evaluate(scenario, &prep, &st)?;
        record(s, 0, 0, "ga", &report);
        if report.total > best.0 {
            best = (report.total, st.clone());
        }

        let mut prev_mid = report.total;
        for z in 1..=config.max_mid_iters {
            let k = step_resource(scenario, config, &prep, &mut st);
            report = evaluate(scenario, &prep, &st)?;
            record(s, z, k, "ipm", &report);
            if report.total > best.0 {
                best = (report.total, st.clone());
            }
            step_alpha_e(scenario, &prep, &mut st);
            report = evaluate(scenario, &prep, &st)?;
            record(s, z, k, "kkt", &report);
            if report.total > best.0 {
                best = (report.total, st.clone());
            }
            if config.rebalance && prep.edge && prep.cloud {
                step_rebalance(scenario, &prep, &mut st);
                report = evaluate(scenario, &prep, &st)?;
                record(s, z, k, "rebalance", &report);
                if report.total > best.0 {
                    best = (report.total, st.clone());
                }
            }
            let done = (report.total - prev_mid).abs() < tol;
            prev_mid = report.total;
            if done {
                break;
            }
        }

        record(s, 0, 0, "outer", &report);
        if (report.total - prev_outer).abs() < tol {
            converged = true;
            break;
        }
        prev_outer = report.total;
    }

    let st = best.1;
    let mut report = evaluate(scenario, &prep, &st)?;
    report.trace = trace;
    let mut ds = decisions(scenario, &prep, &st);
    for (d, v) in ds.iter_mut().zip(&report.vehicles) {
        d.feasible = v.feasible;
    }
    Ok(ScheduleOutput {
        decisions: ds,
        report,
        outer_iterations,
        converged,
    })
}
