//! Computation delays, movement time, end-to-end processing delay and the
//! linear upper-bound surrogates used by the ratio subproblems.
//!
//! A task is split three ways and the parts run in parallel, so the processing
//! delay is the largest of the local, edge and cloud branches. The cloud upload
//! only starts once the edge upload has finished, so the cloud branch also
//! carries the edge communication time. A branch with no work assigned
//! contributes nothing.

use crate::error::{Error, Result};
use crate::scenario::{EconParams, OffloadDecision, Region, Rsu, Scenario, TaskSpec, Vehicle};

pub fn local_delay(decision: &OffloadDecision, vehicle: &Vehicle) -> f64 {
    (1.0 - decision.alpha_e - decision.alpha_c) * vehicle.task.cycles() / vehicle.local_cps
}

pub fn edge_comp_delay(alpha_e: f64, task: &TaskSpec, f_alloc: f64) -> Result<f64> {
    if alpha_e == 0.0 {
        return Ok(0.0);
    }
    if !(f_alloc > 0.0) {
        return Err(Error::ZeroAllocation { vehicle: u32::MAX });
    }
    Ok(alpha_e * task.cycles() / f_alloc)
}

pub fn cloud_comp_delay(alpha_c: f64, task: &TaskSpec, econ: &EconParams) -> f64 {
    alpha_c * task.cycles() / econ.cloud_cps
}

/// Time for a vehicle to drive into the coverage of `rsu`; zero once inside.
pub fn move_time(vehicle: &Vehicle, rsu: &Rsu) -> f64 {
    ((rsu.position_m - vehicle.position_m - rsu.radius_m) / vehicle.speed_mps).max(0.0)
}

/// Linear surrogate `alpha * omega + delta` of the processing delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub omega: f64,
    pub delta: f64,
    pub bound: f64,
}

impl Bound {
    fn at(omega: f64, delta: f64, alpha: f64) -> Self {
        Self {
            omega,
            delta,
            bound: linear(alpha, omega, delta),
        }
    }
}

/// `alpha * omega + delta`, with `0 * inf` taken as zero.
pub fn linear(alpha: f64, omega: f64, delta: f64) -> f64 {
    if alpha == 0.0 {
        delta
    } else {
        alpha * omega + delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branches {
    pub local: f64,
    pub edge: f64,
    pub cloud: f64,
}

impl Branches {
    pub fn max(&self) -> f64 {
        self.local.max(self.edge).max(self.cloud)
    }
}

/// A vehicle's task as the ratio and resource solvers see it: sizes, rates and
/// the deadline that remain once region handling (selection, movement) is
/// settled.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskView {
    pub data_bits: f64,
    pub cycles_per_bit: f64,
    pub deadline: f64,
    pub local_cps: f64,
    pub edge_rate: f64,
    pub cloud_rate: f64,
    pub cloud_cps: f64,
    /// Delay before either server branch can start (movement without transit
    /// offloading).
    pub server_offset: f64,
}

impl TaskView {
    pub fn cycles(&self) -> f64 {
        self.data_bits * self.cycles_per_bit
    }

    pub fn local_delay(&self, alpha_e: f64, alpha_c: f64) -> f64 {
        (1.0 - alpha_e - alpha_c).max(0.0) * self.cycles() / self.local_cps
    }

    pub fn edge_comm(&self, alpha_e: f64) -> f64 {
        if alpha_e == 0.0 {
            0.0
        } else {
            alpha_e * self.data_bits / self.edge_rate
        }
    }

    pub fn edge_delay(&self, alpha_e: f64, f: f64) -> f64 {
        if alpha_e == 0.0 || self.data_bits == 0.0 {
            return 0.0;
        }
        if !(f > 0.0) {
            return f64::INFINITY;
        }
        self.server_offset + self.edge_comm(alpha_e) + alpha_e * self.cycles() / f
    }

    pub fn cloud_delay(&self, alpha_e: f64, alpha_c: f64) -> f64 {
        if alpha_c == 0.0 || self.data_bits == 0.0 {
            return 0.0;
        }
        self.server_offset
            + self.edge_comm(alpha_e)
            + alpha_c * (self.data_bits / self.cloud_rate + self.cycles() / self.cloud_cps)
    }

    pub fn branches(&self, alpha_e: f64, alpha_c: f64, f: f64) -> Branches {
        Branches {
            local: self.local_delay(alpha_e, alpha_c),
            edge: self.edge_delay(alpha_e, f),
            cloud: self.cloud_delay(alpha_e, alpha_c),
        }
    }

    pub fn delay(&self, alpha_e: f64, alpha_c: f64, f: f64) -> f64 {
        self.branches(alpha_e, alpha_c, f).max()
    }

    /// Cloud-side surrogate, linear in `alpha_c` for fixed `alpha_e` and `f`.
    ///
    /// Sums the local branch, the full edge branch and the cloud branch so the
    /// result dominates the true delay.
    pub fn cs_bound(&self, alpha_e: f64, f: f64) -> (f64, f64) {
        let d = self.data_bits;
        let dr = self.cycles();
        let omega = d / self.cloud_rate + dr / self.cloud_cps - dr / self.local_cps;
        let edge_comp = if alpha_e == 0.0 {
            0.0
        } else if f > 0.0 {
            alpha_e * dr / f
        } else {
            f64::INFINITY
        };
        let delta = self.server_offset
            + self.edge_comm(alpha_e)
            + edge_comp
            + (1.0 - alpha_e) * dr / self.local_cps;
        (omega, delta)
    }

    /// Edge-side surrogate, linear in `alpha_e` for fixed `alpha_c` and `f`,
    /// scaled by `1 / lambda`. An upper bound for `lambda = 1`.
    pub fn es_bound(&self, alpha_c: f64, f: f64, lambda: f64) -> (f64, f64) {
        let d = self.data_bits;
        let dr = self.cycles();
        let edge_comp = if f > 0.0 { dr / f } else { f64::INFINITY };
        let omega = (2.0 * d / self.edge_rate + edge_comp - dr / self.local_cps) / lambda;
        let delta = (self.server_offset
            + alpha_c * d / self.cloud_rate
            + (1.0 - alpha_c) * dr / self.local_cps
            + alpha_c * dr / self.cloud_cps)
            / lambda;
        (omega, delta)
    }
}

/// A vehicle's decision resolved against the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedTask {
    pub view: TaskView,
    /// Movement time already spent before the residual task starts.
    pub transit_time: f64,
    /// Cloud computation of the data uploaded during the move, counted from
    /// the end of the move.
    pub transit_tail: f64,
}

impl ResolvedTask {
    pub fn delay(&self, alpha_e: f64, alpha_c: f64, f: f64) -> f64 {
        self.transit_time + self.view.delay(alpha_e, alpha_c, f).max(self.transit_tail)
    }

    /// Constant added to the residual-frame surrogates to express them in the
    /// full frame.
    fn frame_shift(&self) -> f64 {
        self.transit_time + self.transit_tail
    }
}

/// Resolves a decision for `vehicle` into the task view its delay is computed
/// from. `edge_rate` is the vehicle's uplink rate for the slot.
pub fn resolve(
    decision: &OffloadDecision,
    scenario: &Scenario,
    vehicle: &Vehicle,
    edge_rate: f64,
) -> Result<ResolvedTask> {
    let task = &vehicle.task;
    let mut view = TaskView {
        data_bits: task.data_bits,
        cycles_per_bit: task.cycles_per_bit,
        deadline: task.max_delay,
        local_cps: vehicle.local_cps,
        edge_rate,
        cloud_rate: scenario.radio.cloud_rate_bps,
        cloud_cps: scenario.econ.cloud_cps,
        server_offset: 0.0,
    };
    let mut transit_time = 0.0;
    let mut transit_tail = 0.0;
    if vehicle.region == Region::General {
        let id = decision.selection.ok_or(Error::MissingSelection {
            vehicle: vehicle.id,
        })?;
        let rsu = scenario.rsu(id)?;
        match &decision.transit {
            Some(t) => {
                view.data_bits = (task.data_bits - t.local_bits - t.cloud_bits).max(0.0);
                view.deadline = task.max_delay - t.move_time;
                transit_time = t.move_time;
                transit_tail = t.cloud_bits * task.cycles_per_bit / scenario.econ.cloud_cps;
            }
            None => view.server_offset = move_time(vehicle, rsu),
        }
    }
    Ok(ResolvedTask {
        view,
        transit_time,
        transit_tail,
    })
}

/// End-to-end processing delay of `vehicle` under `decision`.
///
/// Infinite when edge work is assigned with zero resource.
pub fn processing_delay(
    decision: &OffloadDecision,
    scenario: &Scenario,
    vehicle: &Vehicle,
    edge_rate: f64,
) -> Result<f64> {
    let r = resolve(decision, scenario, vehicle, edge_rate)?;
    Ok(r.delay(decision.alpha_e, decision.alpha_c, decision.resource))
}

/// Cloud-side surrogate of the processing delay at the decision's `alpha_c`.
pub fn cs_upper_bound(
    decision: &OffloadDecision,
    scenario: &Scenario,
    vehicle: &Vehicle,
    edge_rate: f64,
) -> Result<Bound> {
    let r = resolve(decision, scenario, vehicle, edge_rate)?;
    let (omega, delta) = r.view.cs_bound(decision.alpha_e, decision.resource);
    Ok(Bound::at(omega, delta + r.frame_shift(), decision.alpha_c))
}

/// Edge-side surrogate of the processing delay at the decision's `alpha_e`.
pub fn es_upper_bound(
    decision: &OffloadDecision,
    scenario: &Scenario,
    vehicle: &Vehicle,
    edge_rate: f64,
    lambda: f64,
) -> Result<Bound> {
    let r = resolve(decision, scenario, vehicle, edge_rate)?;
    let (omega, delta) = r.view.es_bound(decision.alpha_c, decision.resource, lambda);
    Ok(Bound::at(
        omega,
        delta + r.frame_shift() / lambda,
        decision.alpha_e,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{EconParams, RadioParams, Transit};

    fn vehicle(x: f64, speed: f64, f_v: f64, task: TaskSpec, region: Region) -> Vehicle {
        Vehicle {
            id: 0,
            position_m: x,
            speed_mps: speed,
            local_cps: f_v,
            tx_power_w: 0.1,
            region,
            task,
        }
    }

    fn rsu(x: f64, r: f64) -> Rsu {
        Rsu {
            id: 0,
            position_m: x,
            radius_m: r,
            es_capacity_hz: 1e9,
        }
    }

    fn decision(ae: f64, ac: f64, f: f64, sel: Option<u32>) -> OffloadDecision {
        OffloadDecision {
            vehicle_id: 0,
            alpha_e: ae,
            alpha_c: ac,
            resource: f,
            selection: sel,
            transit: None,
            feasible: true,
        }
    }

    fn scenario_with(v: Vehicle, r: Rsu) -> Scenario {
        Scenario {
            vehicles: vec![v],
            rsus: vec![r],
            pool: None,
            radio: RadioParams {
                cloud_rate_bps: 4e6,
                ..RadioParams::default()
            },
            econ: EconParams {
                cloud_cps: 1e9,
                ..EconParams::default()
            },
            seed: 0,
        }
    }

    #[test]
    fn local_delay_examples() {
        let task = TaskSpec::new(1e8, 10.0, 5.0).unwrap();
        let v = vehicle(0.0, 10.0, 1.25e7, task, Region::General);
        assert_eq!(local_delay(&decision(0.4, 0.6, 0.0, None), &v), 0.0);
        assert!((local_delay(&decision(0.0, 0.0, 0.0, None), &v) - 80.0).abs() < 1e-9);
        let half = local_delay(&decision(0.25, 0.25, 0.0, None), &v);
        assert!((half - 40.0).abs() < 1e-9);
    }

    #[test]
    fn compute_delay_examples() {
        let task = TaskSpec::new(1e8, 10.0, 5.0).unwrap();
        assert_eq!(edge_comp_delay(0.0, &task, 0.0).unwrap(), 0.0);
        assert!((edge_comp_delay(0.5, &task, 5e8).unwrap() - 1.0).abs() < 1e-12);
        assert!((edge_comp_delay(0.5, &task, 1e9).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(
            edge_comp_delay(0.5, &task, 0.0),
            Err(Error::ZeroAllocation { .. })
        ));
        let econ = EconParams {
            cloud_cps: 1e9,
            ..EconParams::default()
        };
        assert_eq!(cloud_comp_delay(0.0, &task, &econ), 0.0);
        assert!((cloud_comp_delay(1.0, &task, &econ) - 1.0).abs() < 1e-12);
        assert!((cloud_comp_delay(0.3, &task, &econ) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn move_time_examples() {
        let task = TaskSpec::new(1e7, 10.0, 5.0).unwrap();
        let inside = vehicle(180.0, 25.0, 1e7, task.clone(), Region::General);
        assert_eq!(move_time(&inside, &rsu(200.0, 50.0)), 0.0);
        let behind = vehicle(100.0, 25.0, 1e7, task.clone(), Region::General);
        assert!((move_time(&behind, &rsu(200.0, 50.0)) - 2.0).abs() < 1e-12);
        let fast = vehicle(100.0, 50.0, 1e7, task, Region::General);
        assert!((move_time(&fast, &rsu(200.0, 50.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn processing_delay_is_max_of_branches() {
        let task = TaskSpec::new(1e7, 10.0, 5.0).unwrap();
        let v = vehicle(0.0, 10.0, 1e7, task, Region::General);
        let sc = scenario_with(v.clone(), rsu(20.0, 50.0));
        // Local-only reduces to the local branch exactly.
        let d0 = decision(0.0, 0.0, 0.0, Some(0));
        let t = processing_delay(&d0, &sc, &v, 1e7).unwrap();
        assert!((t - local_delay(&d0, &v)).abs() < 1e-12);

        let d = decision(0.3, 0.4, 2e8, Some(0));
        let r = resolve(&d, &sc, &v, 1e7).unwrap();
        let b = r.view.branches(0.3, 0.4, 2e8);
        let t = processing_delay(&d, &sc, &v, 1e7).unwrap();
        assert_eq!(t, b.local.max(b.edge).max(b.cloud));
        assert!(t >= b.local && t >= b.edge && t >= b.cloud);
    }

    #[test]
    fn general_region_needs_selection() {
        let task = TaskSpec::new(1e7, 10.0, 5.0).unwrap();
        let v = vehicle(0.0, 10.0, 1e7, task, Region::General);
        let sc = scenario_with(v.clone(), rsu(20.0, 50.0));
        assert!(matches!(
            processing_delay(&decision(0.2, 0.2, 1e8, None), &sc, &v, 1e7),
            Err(Error::MissingSelection { .. })
        ));
    }

    #[test]
    fn movement_delays_server_branches_only() {
        let task = TaskSpec::new(1e7, 10.0, 5.0).unwrap();
        let v = vehicle(0.0, 10.0, 1e7, task, Region::General);
        let sc = scenario_with(v.clone(), rsu(60.0, 50.0));
        let d = decision(0.5, 0.0, 1e9, Some(0));
        let r = resolve(&d, &sc, &v, 1e7).unwrap();
        assert!((r.view.server_offset - 1.0).abs() < 1e-12);
        // edge: 1 s move + 0.5 s upload + 0.05 s compute
        assert!((r.view.edge_delay(0.5, 1e9) - 1.55).abs() < 1e-12);
        assert!((r.view.local_delay(0.5, 0.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn transit_shifts_into_residual_frame() {
        let task = TaskSpec::new(1e7, 10.0, 5.0).unwrap();
        let v = vehicle(0.0, 10.0, 1e7, task, Region::General);
        let sc = scenario_with(v.clone(), rsu(60.0, 50.0));
        let mut d = decision(0.5, 0.5, 1e9, Some(0));
        d.transit = Some(Transit {
            move_time: 1.0,
            local_bits: 1e6,
            cloud_bits: 4e6,
        });
        let r = resolve(&d, &sc, &v, 1e7).unwrap();
        assert_eq!(r.view.data_bits, 5e6);
        assert_eq!(r.view.deadline, 4.0);
        assert_eq!(r.view.server_offset, 0.0);
        let t = processing_delay(&d, &sc, &v, 1e7).unwrap();
        assert!((t - (1.0 + r.view.delay(0.5, 0.5, 1e9).max(r.transit_tail))).abs() < 1e-12);
    }

    #[test]
    fn cs_bound_examples() {
        let task = TaskSpec::new(1e7, 10.0, 5.0).unwrap();
        let v = vehicle(0.0, 10.0, 1e7, task, Region::General);
        let sc = scenario_with(v.clone(), rsu(20.0, 50.0));
        let d = decision(0.3, 0.0, 2e8, Some(0));
        let b = cs_upper_bound(&d, &sc, &v, 1e7).unwrap();
        assert_eq!(b.bound, b.delta);
        let d = decision(0.3, 0.5, 2e8, Some(0));
        let b = cs_upper_bound(&d, &sc, &v, 1e7).unwrap();
        assert!((b.bound - (0.5 * b.omega + b.delta)).abs() < 1e-12);
        assert!(b.bound >= processing_delay(&d, &sc, &v, 1e7).unwrap());
    }

    #[test]
    fn cs_omega_changes_sign_with_local_speed() {
        let view = |f_v: f64| TaskView {
            data_bits: 1e7,
            cycles_per_bit: 10.0,
            deadline: 5.0,
            local_cps: f_v,
            edge_rate: 1e7,
            cloud_rate: 4e6,
            cloud_cps: 1e9,
            server_offset: 0.0,
        };
        // Cloud round trip per whole task: 2.5 s + 0.1 s = 2.6 s.
        let (slow, _) = view(1e7).cs_bound(0.0, 0.0); // local 10 s
        let (fast, _) = view(1e9).cs_bound(0.0, 0.0); // local 0.1 s
        assert!(slow < 0.0);
        assert!(fast > 0.0);
        assert!((slow - (2.6 - 10.0)).abs() < 1e-9);
        assert!((fast - (2.6 - 0.1)).abs() < 1e-9);
    }

    #[test]
    fn es_bound_examples() {
        let task = TaskSpec::new(1e7, 10.0, 5.0).unwrap();
        let v = vehicle(0.0, 10.0, 1e7, task, Region::General);
        let sc = scenario_with(v.clone(), rsu(20.0, 50.0));
        let d = decision(0.0, 0.4, 2e8, Some(0));
        let b = es_upper_bound(&d, &sc, &v, 1e7, 1.0).unwrap();
        assert_eq!(b.bound, b.delta);
        let d = decision(0.3, 0.4, 2e8, Some(0));
        let b1 = es_upper_bound(&d, &sc, &v, 1e7, 1.0).unwrap();
        let b2 = es_upper_bound(&d, &sc, &v, 1e7, 2.0).unwrap();
        assert!(b1.bound >= processing_delay(&d, &sc, &v, 1e7).unwrap());
        assert!((b2.omega - b1.omega / 2.0).abs() < 1e-12);
        assert!((b2.delta - b1.delta / 2.0).abs() < 1e-12);
    }
}
