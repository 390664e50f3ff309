//! Edge resource allocation under a shared budget by an inverse-barrier
//! interior-point method.
//!
//! Each vehicle's edge branch finishes at `comm + work / f`. Its QoS follows
//! that branch while it is the slowest one, so `f` is capped where the edge
//! branch meets the other branches (`floor`); above the cap extra resource only
//! costs rent. Inside the caps the objective is smooth and concave:
//!
//! `sum_i -beta_P c_s f_i + beta_Q log2(1 + eps - comm_i - work_i / f_i)`
//!
//! subject to `comm_i + work_i / f_i <= deadline_i`, `f_i <= cap_i` and
//! `sum_i f_i <= F`. The constraints become barrier terms `r / g` with
//! `g < 0`; Newton's method maximises the penalised objective for a decreasing
//! sequence of `r`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::error::{Error, Result};
use crate::scenario::EconParams;

/// One vehicle's edge branch, in its full time frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceItem {
    /// Delay before edge computation starts (movement and upload), seconds.
    pub comm: f64,
    /// Cycles to run on the edge.
    pub work: f64,
    pub deadline: f64,
    /// Largest delay of the branches that do not depend on `f`.
    pub floor: f64,
}

impl ResourceItem {
    /// Smallest resource meeting the deadline.
    pub fn f_min(&self) -> f64 {
        let slack = self.deadline - self.comm;
        if self.work == 0.0 {
            0.0
        } else if slack > 0.0 {
            self.work / slack
        } else {
            f64::INFINITY
        }
    }

    /// Resource at which the edge branch stops being the slowest.
    pub fn f_cap(&self) -> f64 {
        let slack = self.floor - self.comm;
        if self.work == 0.0 {
            0.0
        } else if slack > 0.0 {
            self.work / slack
        } else {
            f64::INFINITY
        }
    }

    pub fn delay(&self, f: f64) -> f64 {
        let edge = if self.work == 0.0 {
            0.0
        } else if f > 0.0 {
            self.comm + self.work / f
        } else {
            f64::INFINITY
        };
        edge.max(self.floor)
    }

    /// Objective contribution, `-inf` when the deadline is missed.
    pub fn objective(&self, f: f64, econ: &EconParams) -> f64 {
        let t = self.delay(f);
        let arg = 1.0 + econ.qos_shift - t;
        if t > self.deadline * (1.0 + 1e-12) || !(arg > 0.0) {
            return f64::NEG_INFINITY;
        }
        -econ.profit_weight * econ.server_price * f + econ.qos_weight * arg.log2()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpmOutcome {
    pub f: Vec<f64>,
    /// Penalty iterations run.
    pub iterations: usize,
    pub converged: bool,
    /// Smallest barrier slack seen over all iterates, as a fraction of the
    /// budget; positive means every iterate stayed strictly interior.
    pub min_slack: f64,
}

pub fn objective(items: &[ResourceItem], f: &[f64], econ: &EconParams) -> f64 {
    items
        .iter()
        .zip(f)
        .map(|(it, &x)| it.objective(x, econ))
        .sum()
}

struct Barrier<'a> {
    items: Vec<(usize, ResourceItem, f64, f64)>, // (index, item, x_min, x_cap)
    budget: f64,
    avail: f64,
    econ: &'a EconParams,
}

impl Barrier<'_> {
    /// Slacks of every barrier constraint at `x` (all must be positive).
    fn min_slack(&self, x: &[f64]) -> f64 {
        let mut s = self.avail - x.iter().sum::<f64>();
        for (k, (_, _, lo, hi)) in self.items.iter().enumerate() {
            s = s.min(x[k] - lo);
            if hi.is_finite() {
                s = s.min(hi - x[k]);
            }
        }
        s
    }

    fn value(&self, x: &[f64], r: f64) -> f64 {
        if self.min_slack(x) <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let e = self.econ;
        let mut v = r / (x.iter().sum::<f64>() - self.avail);
        for (k, (_, it, _, hi)) in self.items.iter().enumerate() {
            let f = x[k] * self.budget;
            let edge = it.comm + it.work / f;
            let arg = 1.0 + e.qos_shift - edge;
            if !(arg > 0.0) {
                return f64::NEG_INFINITY;
            }
            v += -e.profit_weight * e.server_price * f + e.qos_weight * arg.log2();
            v += r / (edge - it.deadline);
            if hi.is_finite() {
                v += r / (x[k] - hi);
            }
        }
        v
    }

    /// Gradient and diagonal Hessian of the separable part, plus the
    /// coefficient of the rank-one budget term.
    fn derivatives(&self, x: &[f64], r: f64) -> (Vec<f64>, Vec<f64>, f64, f64) {
        let e = self.econ;
        let n = x.len();
        let mut grad = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let budget = self.budget;
        for (k, (_, it, _, hi)) in self.items.iter().enumerate() {
            let f = x[k] * budget;
            let b = it.work;
            let l = 1.0 + e.qos_shift - it.comm - b / f;
            // Utility, differentiated in f then scaled to x.
            let du = -e.profit_weight * e.server_price + e.qos_weight * (b / (f * f)) / (l * LN_2);
            let d2u =
                e.qos_weight / LN_2 * (-2.0 * b / (f * f * f * l) - (b * b) / (f.powi(4) * l * l));
            grad[k] += du * budget;
            diag[k] += d2u * budget * budget;
            // Deadline barrier r / g, g = comm + b / f - T.
            let g = it.comm + b / f - it.deadline;
            let g1 = -b / (budget * x[k] * x[k]);
            let g2 = 2.0 * b / (budget * x[k].powi(3));
            grad[k] += -r * g1 / (g * g);
            diag[k] += r * (2.0 * g1 * g1 / g.powi(3) - g2 / (g * g));
            // Cap barrier r / (x - cap).
            if hi.is_finite() {
                let h = x[k] - hi;
                grad[k] += -r / (h * h);
                diag[k] += 2.0 * r / h.powi(3);
            }
        }
        let s = x.iter().sum::<f64>() - self.avail;
        let bgrad = -r / (s * s);
        let bhess = 2.0 * r / s.powi(3);
        for g in &mut grad {
            *g += bgrad;
        }
        (grad, diag, bgrad, bhess)
    }

    /// Newton ascent on the penalised objective for fixed `r`.
    fn maximize(&self, x: &mut [f64], r: f64, max_iters: usize, min_slack: &mut f64) {
        let n = x.len();
        let mut val = self.value(x, r);
        for _ in 0..max_iters {
            let (grad, diag, _, c) = self.derivatives(x, r);
            // Solve (D + c 11^T) d = -grad with Sherman-Morrison.
            let dinv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
            let dg: Vec<f64> = grad.iter().zip(&dinv).map(|(g, di)| g * di).collect();
            let sum_dinv: f64 = dinv.iter().sum();
            let sum_dg: f64 = dg.iter().sum();
            let factor = c * sum_dg / (1.0 + c * sum_dinv);
            let mut step: Vec<f64> = (0..n).map(|k| -(dg[k] - dinv[k] * factor)).collect();
            if step.iter().any(|s| !s.is_finite()) {
                // Fall back to a scaled gradient step.
                step = grad.iter().map(|g| g * 1e-6).collect();
            }
            let mut t = 1.0;
            let mut accepted = false;
            let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, s)| xi + t * s).collect();
                let tv = self.value(&trial, r);
                if tv.is_finite() && tv >= val + 1e-4 * t * slope.max(0.0) {
                    let moved = trial
                        .iter()
                        .zip(x.iter())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    x.copy_from_slice(&trial);
                    val = tv;
                    *min_slack = min_slack.min(self.min_slack(x));
                    accepted = true;
                    if moved < 1e-13 {
                        return;
                    }
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return;
            }
        }
    }
}

/// Allocates `budget` cycles/s among the items. Items with no edge work get 0.
///
/// Fails with `InfeasibleBudget` when the items' minimum needs exceed the
/// budget.
pub fn ipm_solve_f(
    items: &[ResourceItem],
    budget: f64,
    econ: &EconParams,
    cfg: &SolverConfig,
) -> Result<IpmOutcome> {
    let mut f = vec![0.0; items.len()];
    let need: f64 = items.iter().map(ResourceItem::f_min).sum();
    if need.is_nan() || need >= budget && need > 0.0 {
        return Err(Error::InfeasibleBudget { need, budget });
    }

    // Items whose edge branch can never be the slowest keep their minimum.
    let mut fixed = 0.0;
    let mut free = Vec::new();
    for (i, it) in items.iter().enumerate() {
        if it.work == 0.0 {
            continue;
        }
        let (lo, cap) = (it.f_min(), it.f_cap());
        if cap <= lo * (1.0 + 1e-9) {
            f[i] = lo;
            fixed += lo;
        } else {
            free.push((i, *it, lo / budget, cap / budget));
        }
    }
    if free.is_empty() {
        return Ok(IpmOutcome {
            f,
            iterations: 0,
            converged: true,
            min_slack: 1.0,
        });
    }

    let avail = (budget - fixed) / budget;
    let barrier = Barrier {
        items: free,
        budget,
        avail,
        econ,
    };
    let n = barrier.items.len();
    let spare = avail - barrier.items.iter().map(|(_, _, lo, _)| lo).sum::<f64>();
    let mut x: Vec<f64> = barrier
        .items
        .iter()
        .map(|(_, _, lo, hi)| lo + (0.5 * (hi - lo)).min(0.5 * spare / n as f64))
        .collect();

    let mut min_slack = barrier.min_slack(&x);
    let mut r = cfg.penalty_r0;
    let mut converged = false;
    let mut iterations = 0;
    let mut prev = x.clone();
    for k in 0..cfg.max_inner_iters {
        iterations = k + 1;
        barrier.maximize(&mut x, r, cfg.newton_max_iters, &mut min_slack);
        let moved = x
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if k > 0 && moved <= cfg.ipm_tolerance && r <= cfg.penalty_r_min {
            converged = true;
            break;
        }
        prev.copy_from_slice(&x);
        r *= cfg.penalty_decay;
    }
    for (k, (i, _, _, _)) in barrier.items.iter().enumerate() {
        f[*i] = x[k] * budget;
    }
    Ok(IpmOutcome {
        f,
        iterations,
        converged,
        min_slack,
    })
}
