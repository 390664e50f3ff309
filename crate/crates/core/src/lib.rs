//! Multi-scenario cloud-edge-terminal task offloading for vehicular networks.
//!
//! Vehicles split each task between local processing, an edge server reached
//! over a roadside unit, and a cloud server. The scheduler picks the RSU for
//! vehicles in singly-covered road segments, the edge/cloud offloading ratios
//! and the edge computation resource, maximising a utility that mixes operator
//! profit and a logarithmic QoS reward under per-task deadlines and server
//! budgets.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod baselines;
pub mod error;
pub mod harness;
pub mod latency;
pub mod oracle;
pub mod radio;
pub mod scenario;
pub mod schedule;
pub mod solvers;
pub mod utility;

pub use error::{Error, Result};
pub use scenario::{
    generate_scenario, GenConfig, OffloadDecision, Region, RegionKind, Rsu, Scenario, TaskSpec,
    Vehicle,
};
pub use utility::{check_constraints, system_utility, UtilityReport};
