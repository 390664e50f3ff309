//! Subproblem solvers for the alternating optimisation.
//!
//! With the resource fixed, both ratio subproblems share one scalar form per
//! vehicle: maximise `gain * a + qos(omega * a + delta)` over `a` in
//! `[0, upper]` subject to `omega * a + delta <= deadline`, where the delay is
//! a linear upper bound. The cloud ratio is solved by a genetic algorithm, the
//! edge ratio in closed form. The resource subproblem couples vehicles through
//! a shared budget and is solved by an inverse-barrier interior-point method.

mod config;
pub mod ga;
pub mod ipm;
pub mod kkt;

pub use config::{AlphaCMethod, SolverConfig};
pub use ga::{ga_maximize, ga_solve_alpha_c};
pub use ipm::{ipm_solve_f, IpmOutcome, ResourceItem};
pub use kkt::{kkt_maximize, kkt_solve_alpha_e, KktCase, KktSolution};

use serde::{Deserialize, Serialize};

use crate::latency::linear;
use crate::scenario::EconParams;
use crate::utility::within_tol;

/// Scalar ratio subproblem for one vehicle. All delays are in the vehicle's
/// full time frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioProblem {
    /// Profit earned per unit of ratio, `profit_weight * vehicle_price * cycles`.
    pub gain: f64,
    pub omega: f64,
    pub delta: f64,
    pub deadline: f64,
    /// Upper end of the ratio box.
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSolution {
    pub value: f64,
    /// False when no ratio in the box meets the bound's deadline; `value` is
    /// then the ratio with the smallest bound.
    pub feasible: bool,
}

impl RatioProblem {
    pub fn bound(&self, a: f64) -> f64 {
        linear(a, self.omega, self.delta)
    }

    /// Objective value, `-inf` outside the QoS domain.
    pub fn objective(&self, a: f64, econ: &EconParams) -> f64 {
        let arg = 1.0 + econ.qos_shift - self.bound(a);
        if !(arg > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.gain * a + econ.qos_weight * arg.log2()
    }

    pub fn derivative(&self, a: f64, econ: &EconParams) -> f64 {
        let arg = 1.0 + econ.qos_shift - self.bound(a);
        self.gain - econ.qos_weight * self.omega / (arg * std::f64::consts::LN_2)
    }

    pub fn is_feasible(&self, a: f64) -> bool {
        (0.0..=self.upper).contains(&a)
            && within_tol((self.bound(a) - self.deadline).max(0.0), self.deadline)
    }

    /// Ratios in the box whose bound meets the deadline.
    pub fn feasible_interval(&self) -> Option<(f64, f64)> {
        let upper = self.upper.max(0.0);
        if !self.delta.is_finite() || !self.omega.is_finite() {
            return if self.delta <= self.deadline && self.omega == f64::INFINITY {
                Some((0.0, 0.0))
            } else {
                None
            };
        }
        let slack = self.deadline - self.delta;
        let (lo, hi) = if self.omega > 0.0 {
            (0.0, upper.min(slack / self.omega))
        } else if self.omega < 0.0 {
            ((slack / self.omega).max(0.0), upper)
        } else if slack >= 0.0 {
            (0.0, upper)
        } else {
            return None;
        };
        (lo <= hi).then_some((lo, hi))
    }

    /// End of the box with the smallest bound.
    pub fn least_violating(&self) -> f64 {
        if self.omega < 0.0 {
            self.upper.max(0.0)
        } else {
            0.0
        }
    }
}

/// Maximiser of a concave scalar problem by bisection on the derivative.
pub fn bisection_maximize(p: &RatioProblem, econ: &EconParams) -> RatioSolution {
    let Some((lo, hi)) = p.feasible_interval() else {
        return RatioSolution {
            value: p.least_violating(),
            feasible: false,
        };
    };
    let (mut a, mut b) = (lo, hi);
    if p.derivative(a, econ) <= 0.0 {
        return RatioSolution {
            value: a,
            feasible: true,
        };
    }
    if p.derivative(b, econ) >= 0.0 {
        return RatioSolution {
            value: b,
            feasible: true,
        };
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if p.derivative(m, econ) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    RatioSolution {
        value: 0.5 * (a + b),
        feasible: true,
    }
}
