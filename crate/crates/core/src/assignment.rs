//! RSU selection for general-region vehicles by minimum-weight matching, and
//! the cloud-terminal update applied while a vehicle drives into coverage.

use crate::error::{Error, Result};
use crate::latency::move_time;
use crate::scenario::{RadioParams, Region, Rsu, Scenario, TaskSpec, Transit, Vehicle};

/// Centre-to-centre distances, one row per vehicle and one column per RSU.
pub fn build_weight_matrix(vehicles: &[Vehicle], rsus: &[Rsu]) -> Vec<Vec<f64>> {
    vehicles
        .iter()
        .map(|v| {
            rsus.iter()
                .map(|r| (r.position_m - v.position_m).abs())
                .collect()
        })
        .collect()
}

/// Repeats every column `slots` times so several rows can land on the same RSU.
/// Column `j * slots + s` is slot `s` of RSU `j`.
pub fn replicate_slots(weights: &[Vec<f64>], slots: usize) -> Vec<Vec<f64>> {
    weights
        .iter()
        .map(|row| {
            row.iter()
                .flat_map(|&w| std::iter::repeat_n(w, slots))
                .collect()
        })
        .collect()
}

/// Minimum-weight assignment of every row to a distinct column (Hungarian
/// method with potentials, `O(n^2 m)`). Returns the column of each row.
pub fn km_min_weight_matching(weights: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = weights.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = weights[0].len();
    if weights.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidConfig("ragged weight matrix".into()));
    }
    if n > m {
        return Err(Error::InfeasibleMatching { rows: n, slots: m });
    }
    if weights.iter().flatten().any(|w| !w.is_finite()) {
        return Err(Error::InvalidConfig("weights must be finite".into()));
    }

    // 1-based arrays; index 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = weights[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=m {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    Ok(assignment)
}

pub fn matching_weight(weights: &[Vec<f64>], assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| weights[i][j])
        .sum()
}

/// RSU selection for every vehicle: matched RSU id for general-region
/// vehicles, `None` for pool-served ones.
pub fn select_rsus(scenario: &Scenario) -> Result<Vec<Option<u32>>> {
    let general: Vec<usize> = scenario
        .vehicles
        .iter()
        .enumerate()
        .filter(|(_, v)| v.region == Region::General)
        .map(|(i, _)| i)
        .collect();
    let mut out = vec![None; scenario.vehicles.len()];
    if general.is_empty() {
        return Ok(out);
    }
    let rsus: Vec<Rsu> = scenario.general_rsus().cloned().collect();
    let vehicles: Vec<Vehicle> = general
        .iter()
        .map(|&i| scenario.vehicles[i].clone())
        .collect();
    let slots = general.len().div_ceil(rsus.len());
    let weights = replicate_slots(&build_weight_matrix(&vehicles, &rsus), slots);
    let assignment = km_min_weight_matching(&weights)?;
    for (k, &i) in general.iter().enumerate() {
        out[i] = Some(rsus[assignment[k] / slots].id);
    }
    Ok(out)
}

/// Nearest general RSU of every general-region vehicle.
pub fn nearest_rsus(scenario: &Scenario) -> Vec<Option<u32>> {
    scenario
        .vehicles
        .iter()
        .map(|v| match v.region {
            Region::General => scenario
                .general_rsus()
                .min_by(|a, b| {
                    (a.position_m - v.position_m)
                        .abs()
                        .total_cmp(&(b.position_m - v.position_m).abs())
                })
                .map(|r| r.id),
            Region::Overlapping => None,
        })
        .collect()
}

/// Residual task after the vehicle moves into coverage of `rsu`, processing
/// locally and uploading to the cloud on the way.
///
/// When the move is long enough to exhaust the task, the local and cloud
/// shares are scaled down together so they add up to the task size.
pub fn cloud_terminal_update(
    vehicle: &Vehicle,
    rsu: &Rsu,
    radio: &RadioParams,
) -> Result<(TaskSpec, Transit)> {
    let task = &vehicle.task;
    let t_move = move_time(vehicle, rsu);
    let remaining = task.max_delay - t_move;
    if remaining <= 0.0 {
        return Err(Error::TaskExpired {
            vehicle: vehicle.id,
            remaining,
        });
    }
    let mut local_bits = t_move * vehicle.local_cps / task.cycles_per_bit;
    let mut cloud_bits = t_move * radio.cloud_rate_bps;
    let moved = local_bits + cloud_bits;
    if moved > task.data_bits {
        let scale = task.data_bits / moved;
        local_bits *= scale;
        cloud_bits *= scale;
    }
    let residual = TaskSpec {
        data_bits: (task.data_bits - local_bits - cloud_bits).max(0.0),
        cycles_per_bit: task.cycles_per_bit,
        max_delay: remaining,
    };
    Ok((
        residual,
        Transit {
            move_time: t_move,
            local_bits,
            cloud_bits,
        },
    ))
}
