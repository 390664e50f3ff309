use serde::{Deserialize, Serialize};

use crate::baselines::SgrrConfig;
use crate::error::{Error, Result};
use crate::scenario::{GenConfig, Placement};
use crate::solvers::SolverConfig;

/// One experiment file: the scenario generator, the solvers, and the grids
/// of the four experiments. Every field has a default, so `{}` is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scenario: GenConfig,
    pub solver: SolverConfig,
    pub sgrr: SgrrConfig,
    /// Scenario seeds averaged per sweep point.
    pub seeds_per_point: usize,
    pub convergence: ConvergenceConfig,
    pub radius_sweep: RadiusSweepConfig,
    pub vehicle_sweep: VehicleSweepConfig,
    pub pool_compare: PoolCompareConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    /// Random initial points run after the uniform one.
    pub random_inits: usize,
    pub init_alpha_e: f64,
    pub init_alpha_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadiusSweepConfig {
    pub radii_m: Vec<f64>,
    /// Placement for the Nearby runs. MSCET and SGRR use the scenario's own.
    pub nearby_placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleSweepConfig {
    pub vehicles: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolVariant {
    pub name: String,
    /// One capacity per member ES.
    pub capacities_hz: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoolCompareConfig {
    pub vehicles: usize,
    pub variants: Vec<PoolVariant>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: GenConfig::default(),
            solver: SolverConfig::default(),
            sgrr: SgrrConfig::default(),
            seeds_per_point: 10,
            convergence: ConvergenceConfig::default(),
            radius_sweep: RadiusSweepConfig::default(),
            vehicle_sweep: VehicleSweepConfig::default(),
            pool_compare: PoolCompareConfig::default(),
        }
    }
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            random_inits: 3,
            init_alpha_e: 1.0 / 3.0,
            init_alpha_c: 1.0 / 3.0,
        }
    }
}

impl Default for RadiusSweepConfig {
    fn default() -> Self {
        Self {
            radii_m: vec![20.0, 40.0, 60.0, 80.0, 100.0, 120.0],
            nearby_placement: Placement::Cluster {
                from_m: 0.0,
                to_m: 100.0,
            },
        }
    }
}

impl Default for VehicleSweepConfig {
    fn default() -> Self {
        Self {
            vehicles: vec![2, 4, 6, 8, 10],
        }
    }
}

impl Default for PoolCompareConfig {
    fn default() -> Self {
        let (rich, poor) = (2.0e9, 0.1e9);
        Self {
            vehicles: 10,
            variants: vec![
                PoolVariant {
                    name: "resource-rich".into(),
                    capacities_hz: vec![rich; 5],
                },
                PoolVariant {
                    name: "one-limited".into(),
                    capacities_hz: vec![rich, rich, poor, rich, rich],
                },
                PoolVariant {
                    name: "three-limited".into(),
                    capacities_hz: vec![rich, poor, poor, poor, rich],
                },
            ],
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.solver.validate()?;
        self.sgrr.validate()?;
        if self.seeds_per_point == 0 {
            return Err(Error::InvalidConfig(
                "seeds_per_point must be positive".into(),
            ));
        }
        let c = &self.convergence;
        if !(c.init_alpha_e >= 0.0
            && c.init_alpha_c >= 0.0
            && c.init_alpha_e + c.init_alpha_c <= 1.0)
        {
            return Err(Error::InvalidConfig(
                "convergence init ratios leave the simplex".into(),
            ));
        }
        if self
            .radius_sweep
            .radii_m
            .iter()
            .any(|&r| !(r > 0.0 && r.is_finite()))
        {
            return Err(Error::InvalidConfig("radii must be positive".into()));
        }
        if self.vehicle_sweep.vehicles.contains(&0) {
            return Err(Error::InvalidConfig(
                "vehicle counts must be positive".into(),
            ));
        }
        if self.pool_compare.vehicles == 0 {
            return Err(Error::InvalidConfig(
                "pool comparison needs vehicles".into(),
            ));
        }
        for v in &self.pool_compare.variants {
            if v.capacities_hz.is_empty()
                || v.capacities_hz
                    .iter()
                    .any(|&c| !(c >= 0.0 && c.is_finite()))
            {
                return Err(Error::InvalidConfig(format!(
                    "pool variant {} needs non-negative capacities",
                    v.name
                )));
            }
        }
        Ok(())
    }
}
