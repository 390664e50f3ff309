//! Uplink rates and communication delays.
//!
//! Channel gains follow a distance power law with a 1 m clamp. Rates are
//! computed once per time slot from the vehicles' slot-start positions and
//! held fixed while the slot is scheduled.

use crate::error::{Error, Result};
use crate::scenario::{InterferenceScope, RadioParams, Region, Rsu, Scenario, TaskSpec, Vehicle};

pub fn gain_at_distance(distance_m: f64, radio: &RadioParams) -> f64 {
    radio.reference_gain * distance_m.abs().max(1.0).powf(-radio.path_loss_exponent)
}

pub fn channel_gain(vehicle: &Vehicle, rsu: &Rsu, radio: &RadioParams) -> f64 {
    gain_at_distance(rsu.position_m - vehicle.position_m, radio)
}

/// Shannon rate in bits/s for a transmitter of power `tx_power_w` over a link
/// of gain `gain`, given interferers as `(power, gain-to-the-same-receiver)`.
pub fn shannon_rate(
    tx_power_w: f64,
    gain: f64,
    interferers: &[(f64, f64)],
    radio: &RadioParams,
) -> f64 {
    let interference: f64 = interferers.iter().map(|(p, g)| p * g).sum();
    let sinr = tx_power_w * gain / (radio.noise_w + interference);
    radio.bandwidth_hz * (1.0 + sinr).log2()
}

pub fn cloud_comm_delay(alpha_c: f64, task: &TaskSpec, radio: &RadioParams) -> f64 {
    alpha_c * task.data_bits / radio.cloud_rate_bps
}

pub fn edge_comm_delay(alpha_e: f64, task: &TaskSpec, rate_bps: f64) -> Result<f64> {
    if !(rate_bps > 0.0) {
        return Err(Error::InvalidRate(rate_bps));
    }
    Ok(alpha_e * task.data_bits / rate_bps)
}

/// Nearest pool member to a vehicle; this is the antenna a pooled vehicle
/// uploads through.
pub fn nearest_member<'a>(scenario: &'a Scenario, vehicle: &Vehicle) -> Option<&'a Rsu> {
    scenario.pool_members().min_by(|a, b| {
        (a.position_m - vehicle.position_m)
            .abs()
            .total_cmp(&(b.position_m - vehicle.position_m).abs())
    })
}

/// Serving antenna of every vehicle: the selected RSU for general-region
/// vehicles, the nearest pool member otherwise.
pub fn serving_antennas(scenario: &Scenario, selections: &[Option<u32>]) -> Vec<Option<u32>> {
    scenario
        .vehicles
        .iter()
        .zip(selections)
        .map(|(v, sel)| match v.region {
            Region::General => *sel,
            Region::Overlapping => nearest_member(scenario, v).map(|r| r.id),
        })
        .collect()
}

/// Uplink rate of every vehicle to its serving antenna. Vehicles without an
/// antenna get a rate of zero.
pub fn uplink_rates(scenario: &Scenario, serving: &[Option<u32>]) -> Result<Vec<f64>> {
    let radio = &scenario.radio;
    let mut rates = Vec::with_capacity(scenario.vehicles.len());
    for (i, v) in scenario.vehicles.iter().enumerate() {
        let Some(antenna_id) = serving[i] else {
            rates.push(0.0);
            continue;
        };
        let antenna = scenario.rsu(antenna_id)?;
        let interferers: Vec<(f64, f64)> = scenario
            .vehicles
            .iter()
            .enumerate()
            .filter(|&(k, other)| {
                k != i
                    && serving[k].is_some()
                    && match radio.interference {
                        InterferenceScope::SameServer => serving[k] == Some(antenna_id),
                        InterferenceScope::Region => other.region == v.region,
                        InterferenceScope::Off => false,
                    }
            })
            .map(|(_, other)| (other.tx_power_w, channel_gain(other, antenna, radio)))
            .collect();
        rates.push(shannon_rate(
            v.tx_power_w,
            channel_gain(v, antenna, radio),
            &interferers,
            radio,
        ));
    }
    Ok(rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_scenario, GenConfig};

    fn radio(b: f64, noise: f64, exp: f64, g0: f64) -> RadioParams {
        RadioParams {
            bandwidth_hz: b,
            noise_w: noise,
            path_loss_exponent: exp,
            reference_gain: g0,
            ..RadioParams::default()
        }
    }

    #[test]
    fn gain_power_law_with_clamp() {
        let r = radio(1.0, 1.0, 3.0, 1.0);
        assert_eq!(gain_at_distance(1.0, &r), 1.0);
        assert!((gain_at_distance(10.0, &r) - 1e-3).abs() < 1e-15);
        assert_eq!(gain_at_distance(0.0, &r), 1.0);
        assert_eq!(gain_at_distance(0.3, &r), 1.0);
    }

    #[test]
    fn shannon_examples() {
        let r = radio(1.0, 0.5, 3.0, 1.0);
        // P*G equal to noise: SINR 1.
        assert!((shannon_rate(0.5, 1.0, &[], &r) - 1.0).abs() < 1e-12);
        let r5 = radio(5.0, 1.0, 3.0, 1.0);
        assert!((shannon_rate(3.0, 1.0, &[], &r5) - 10.0).abs() < 1e-12);
        let clean = shannon_rate(3.0, 1.0, &[], &r5);
        let noisy = shannon_rate(3.0, 1.0, &[(0.1, 0.5)], &r5);
        assert!(noisy < clean && noisy > 0.0);
    }

    #[test]
    fn rate_monotone_in_powers() {
        let r = radio(1e6, 1e-9, 3.0, 1e-3);
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let rate = shannon_rate(0.1, 1e-6, &[(0.01 * k as f64, 1e-6)], &r);
            assert!(rate <= prev);
            prev = rate;
        }
        let mut prev = 0.0;
        for k in 1..20 {
            let rate = shannon_rate(0.01 * k as f64, 1e-6, &[(0.05, 1e-6)], &r);
            assert!(rate > prev);
            prev = rate;
        }
    }

    #[test]
    fn delay_examples() {
        let task = TaskSpec::new(1e7, 10.0, 5.0).unwrap();
        let r = RadioParams {
            cloud_rate_bps: 5e6,
            ..RadioParams::default()
        };
        assert_eq!(cloud_comm_delay(0.0, &task, &r), 0.0);
        assert!((cloud_comm_delay(0.5, &task, &r) - 1.0).abs() < 1e-12);
        assert!((cloud_comm_delay(1.0, &task, &r) - 2.0).abs() < 1e-12);

        let t2 = TaskSpec::new(2e6, 10.0, 5.0).unwrap();
        assert_eq!(edge_comm_delay(0.0, &t2, 1e6).unwrap(), 0.0);
        assert!((edge_comm_delay(1.0, &t2, 1e6).unwrap() - 2.0).abs() < 1e-12);
        assert!((edge_comm_delay(1.0, &t2, 2e6).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            edge_comm_delay(0.5, &t2, 0.0),
            Err(Error::InvalidRate(_))
        ));
    }

    #[test]
    fn delays_linear_in_ratio() {
        let task = TaskSpec::new(3e7, 10.0, 5.0).unwrap();
        let r = RadioParams::default();
        let h = 1e-3;
        for k in 1..10 {
            let a = k as f64 / 10.0;
            let slope = (cloud_comm_delay(a + h, &task, &r) - cloud_comm_delay(a - h, &task, &r))
                / (2.0 * h);
            assert!((slope - task.data_bits / r.cloud_rate_bps).abs() < 1e-6);
            let es = (edge_comm_delay(a + h, &task, 7e6).unwrap()
                - edge_comm_delay(a - h, &task, 7e6).unwrap())
                / (2.0 * h);
            assert!((es - task.data_bits / 7e6).abs() < 1e-6);
        }
    }

    #[test]
    fn pooled_vehicles_use_nearest_member() {
        let cfg = GenConfig {
            region: crate::scenario::RegionKind::Overlapping,
            vehicles: 6,
            ..GenConfig::default()
        };
        let sc = generate_scenario(&cfg, 2).unwrap();
        let serving = serving_antennas(&sc, &[None; 6]);
        for (v, s) in sc.vehicles.iter().zip(&serving) {
            let chosen = sc.rsu(s.unwrap()).unwrap();
            for r in &sc.rsus {
                assert!(
                    (chosen.position_m - v.position_m).abs() <= (r.position_m - v.position_m).abs()
                );
            }
        }
        let rates = uplink_rates(&sc, &serving).unwrap();
        assert!(rates.iter().all(|&r| r > 0.0));
    }

    #[test]
    fn interference_scope_orders_rates() {
        let mut sc = generate_scenario(&GenConfig::default(), 5).unwrap();
        let sel: Vec<Option<u32>> = sc.vehicles.iter().map(|v| Some(v.id % 5)).collect();
        let serving = serving_antennas(&sc, &sel);
        sc.radio.interference = InterferenceScope::Off;
        let off = uplink_rates(&sc, &serving).unwrap();
        sc.radio.interference = InterferenceScope::SameServer;
        let same = uplink_rates(&sc, &serving).unwrap();
        sc.radio.interference = InterferenceScope::Region;
        let all = uplink_rates(&sc, &serving).unwrap();
        for i in 0..off.len() {
            assert!(off[i] >= same[i] && same[i] >= all[i]);
        }
    }
}
