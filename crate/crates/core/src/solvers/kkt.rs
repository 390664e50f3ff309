//! Closed-form edge ratio from the KKT conditions.
//!
//! Candidates are the box ends, the point where the deadline bound is active
//! and the unconstrained stationary point. The deadline candidate is kept only
//! when its multiplier has the right sign. The best feasible candidate wins,
//! ties going to the smaller ratio.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use super::{RatioProblem, RatioSolution};
use crate::scenario::EconParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KktCase {
    /// Everything goes to the cloud; only when the cloud ratio is already 1.
    CloudOnly,
    /// The whole remainder goes to the edge.
    FullRemainder,
    /// Nothing goes to the edge.
    Zero,
    /// Deadline bound active.
    DeadlineActive,
    /// Interior stationary point, no constraint active.
    Stationary,
    /// Bound has no slope in the ratio; profit alone decides.
    Degenerate,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktSolution {
    pub value: f64,
    pub case: KktCase,
    /// Multiplier of the deadline constraint as the Lagrangian sign convention
    /// of the minimisation form gives it; the deadline case is valid when it is
    /// not positive.
    pub zeta: f64,
}

/// `beta_Q / ((1 + eps - T) ln 2) - gain / omega`.
pub fn zeta(p: &RatioProblem, econ: &EconParams) -> f64 {
    econ.qos_weight / ((1.0 + econ.qos_shift - p.deadline) * LN_2) - p.gain / p.omega
}

pub fn kkt_maximize(p: &RatioProblem, econ: &EconParams) -> KktSolution {
    let z = if p.omega != 0.0 && p.omega.is_finite() {
        zeta(p, econ)
    } else {
        f64::NAN
    };
    if p.upper <= 0.0 {
        let case = if p.upper == 0.0 && p.delta.is_finite() {
            KktCase::CloudOnly
        } else {
            KktCase::Zero
        };
        let feasible = p.is_feasible(0.0);
        return KktSolution {
            value: 0.0,
            case: if feasible { case } else { KktCase::Infeasible },
            zeta: z,
        };
    }
    if p.feasible_interval().is_none() {
        return KktSolution {
            value: p.least_violating(),
            case: KktCase::Infeasible,
            zeta: z,
        };
    }
    if p.omega == 0.0 {
        let value = if p.gain > 0.0 { p.upper } else { 0.0 };
        return KktSolution {
            value,
            case: KktCase::Degenerate,
            zeta: z,
        };
    }

    let mut candidates = vec![(0.0, KktCase::Zero), (p.upper, KktCase::FullRemainder)];
    if p.omega.is_finite() {
        if z <= 0.0 {
            candidates.push(((p.deadline - p.delta) / p.omega, KktCase::DeadlineActive));
        }
        if p.gain > 0.0 {
            let a = (1.0 + econ.qos_shift - p.delta - econ.qos_weight * p.omega / (p.gain * LN_2))
                / p.omega;
            candidates.push((a, KktCase::Stationary));
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best: Option<(f64, KktCase, f64)> = None;
    for (a, case) in candidates {
        if !a.is_finite() || !p.is_feasible(a) {
            continue;
        }
        let u = p.objective(a, econ);
        if best.is_none_or(|(_, _, bu)| u > bu) {
            best = Some((a, case, u));
        }
    }
    match best {
        Some((value, case, _)) => KktSolution {
            value,
            case,
            zeta: z,
        },
        None => KktSolution {
            value: p.least_violating(),
            case: KktCase::Infeasible,
            zeta: z,
        },
    }
}

pub fn kkt_solve_alpha_e(problems: &[RatioProblem], econ: &EconParams) -> Vec<RatioSolution> {
    problems
        .iter()
        .map(|p| {
            let s = kkt_maximize(p, econ);
            RatioSolution {
                value: s.value,
                feasible: s.case != KktCase::Infeasible,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn econ() -> EconParams {
        EconParams::default()
    }

    #[test]
    fn interior_deadline_case() {
        // T = 4, delta = 1, omega = 6: the deadline binds at 0.5.
        let p = RatioProblem {
            gain: 30.0,
            omega: 6.0,
            delta: 1.0,
            deadline: 4.0,
            upper: 1.0,
        };
        let s = kkt_maximize(&p, &econ());
        assert_eq!(s.case, KktCase::DeadlineActive);
        assert!((s.value - 0.5).abs() < 1e-12);
        assert!(s.zeta < 0.0);
    }

    #[test]
    fn full_remainder_case() {
        let p = RatioProblem {
            gain: 30.0,
            omega: 1.0,
            delta: 1.0,
            deadline: 4.0,
            upper: 0.6,
        };
        let s = kkt_maximize(&p, &econ());
        assert_eq!(s.case, KktCase::FullRemainder);
        assert_eq!(s.value, 0.6);
    }

    #[test]
    fn zero_case_without_profit() {
        let p = RatioProblem {
            gain: 0.0,
            omega: 2.0,
            delta: 1.0,
            deadline: 4.0,
            upper: 1.0,
        };
        let s = kkt_maximize(&p, &econ());
        assert_eq!(s.case, KktCase::Zero);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn cloud_only_when_no_room() {
        let p = RatioProblem {
            gain: 30.0,
            omega: 2.0,
            delta: 1.0,
            deadline: 4.0,
            upper: 0.0,
        };
        let s = kkt_maximize(&p, &econ());
        assert_eq!(s.case, KktCase::CloudOnly);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn stationary_case() {
        let p = RatioProblem {
            gain: 0.5,
            omega: 2.0,
            delta: 1.0,
            deadline: 5.0,
            upper: 1.0,
        };
        let s = kkt_maximize(&p, &econ());
        assert_eq!(s.case, KktCase::Stationary);
        assert!(p.derivative(s.value, &econ()).abs() < 1e-9);
    }

    #[test]
    fn negative_slope_prefers_upper() {
        let p = RatioProblem {
            gain: 1.0,
            omega: -3.0,
            delta: 6.0,
            deadline: 5.0,
            upper: 1.0,
        };
        let s = kkt_maximize(&p, &econ());
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn degenerate_omega() {
        let p = RatioProblem {
            gain: 1.0,
            omega: 0.0,
            delta: 3.0,
            deadline: 5.0,
            upper: 0.7,
        };
        let s = kkt_maximize(&p, &econ());
        assert_eq!(s.case, KktCase::Degenerate);
        assert_eq!(s.value, 0.7);
    }

    #[test]
    fn infeasible_flagged() {
        let p = RatioProblem {
            gain: 1.0,
            omega: 1.0,
            delta: 6.0,
            deadline: 5.0,
            upper: 1.0,
        };
        let s = kkt_solve_alpha_e(&[p], &econ());
        assert!(!s[0].feasible);
        assert_eq!(s[0].value, 0.0);
    }
}
