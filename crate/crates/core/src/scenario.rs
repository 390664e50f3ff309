//! Domain types: vehicles, RSUs, the virtual resource pool, radio and economic
//! parameters, and the per-vehicle offloading decision.
//!
//! Everything is stored in SI units: bits, CPU cycles, seconds, metres, watts,
//! hertz. Conversion helpers for the customary units (MB, km/h) live here too.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One megabyte in bits (decimal convention).
pub const BITS_PER_MB: f64 = 8.0e6;

pub fn mb_to_bits(mb: f64) -> f64 {
    mb * BITS_PER_MB
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

/// A vehicle's workload: input size, processing density and deadline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub data_bits: f64,
    pub cycles_per_bit: f64,
    pub max_delay: f64,
}

impl TaskSpec {
    pub fn new(data_bits: f64, cycles_per_bit: f64, max_delay: f64) -> Result<Self> {
        let t = Self {
            data_bits,
            cycles_per_bit,
            max_delay,
        };
        t.validate()?;
        Ok(t)
    }

    /// Total CPU cycles needed to process the whole task.
    pub fn cycles(&self) -> f64 {
        self.data_bits * self.cycles_per_bit
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.data_bits > 0.0 && self.cycles_per_bit > 0.0 && self.max_delay > 0.0) {
            return Err(Error::InvalidScenario(format!(
                "task fields must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Covered by at most one RSU; the vehicle must select an RSU.
    General,
    /// Covered by several RSUs whose servers form the virtual resource pool.
    Overlapping,
}

impl Region {
    /// The 0/1 region flag.
    pub fn flag(self) -> u8 {
        match self {
            Region::General => 0,
            Region::Overlapping => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: u32,
    pub position_m: f64,
    pub speed_mps: f64,
    /// Local computation resource, CPU cycles/s.
    pub local_cps: f64,
    pub tx_power_w: f64,
    pub region: Region,
    pub task: TaskSpec,
}

impl Vehicle {
    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        if !(self.speed_mps > 0.0 && self.local_cps > 0.0 && self.tx_power_w > 0.0)
            || !self.position_m.is_finite()
        {
            return Err(Error::InvalidScenario(format!(
                "vehicle {} has non-positive speed, compute or power",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rsu {
    pub id: u32,
    pub position_m: f64,
    pub radius_m: f64,
    /// Edge server capacity, CPU cycles/s.
    pub es_capacity_hz: f64,
}

/// Aggregated capacity of the edge servers covering an overlapping region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourcePool {
    pub total_capacity_hz: f64,
    pub member_rsu_ids: Vec<u32>,
}

/// Which other vehicles contribute to the interference term of a vehicle's
/// uplink rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceScope {
    /// Vehicles uploading to the same serving RSU (or the same pool antenna).
    #[default]
    SameServer,
    /// Every other vehicle in the same region type.
    Region,
    /// No interference; noise-limited links.
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioParams {
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    /// Constant vehicle-to-cloud rate, bits/s.
    pub cloud_rate_bps: f64,
    pub path_loss_exponent: f64,
    pub reference_gain: f64,
    pub interference: InterferenceScope,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 40.0e6,
            noise_w: 1.0e-9,
            cloud_rate_bps: 18.0e6,
            path_loss_exponent: 3.0,
            reference_gain: 1.0e-3,
            interference: InterferenceScope::SameServer,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0
            && self.noise_w > 0.0
            && self.cloud_rate_bps > 0.0
            && self.path_loss_exponent >= 2.0
            && self.reference_gain > 0.0)
        {
            return Err(Error::InvalidConfig(format!(
                "bad radio parameters: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EconParams {
    pub profit_weight: f64,
    pub qos_weight: f64,
    /// Price charged to vehicles per offloaded CPU cycle.
    pub vehicle_price: f64,
    /// Rent paid per unit of server resource (per cycle/s).
    pub server_price: f64,
    /// Shift that keeps the QoS logarithm positive, seconds.
    pub qos_shift: f64,
    /// Cloud computation resource provided to each vehicle, cycles/s.
    pub cloud_cps: f64,
    /// Approximation degree of the edge-side delay surrogate.
    pub approx_degree: f64,
}

impl Default for EconParams {
    fn default() -> Self {
        Self {
            profit_weight: 1.0,
            qos_weight: 1.0,
            vehicle_price: 2.0e-8,
            server_price: 1.0e-10,
            qos_shift: 6.0,
            cloud_cps: 10.0e9,
            approx_degree: 1.0,
        }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.profit_weight >= 0.0
            && self.qos_weight >= 0.0
            && self.vehicle_price >= 0.0
            && self.server_price >= 0.0
            && self.cloud_cps > 0.0
            && self.approx_degree > 0.0
            && self.qos_shift.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "bad economic parameters: {self:?}"
            )));
        }
        Ok(())
    }
}

/// The world for one time slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub vehicles: Vec<Vehicle>,
    pub rsus: Vec<Rsu>,
    pub pool: Option<ResourcePool>,
    pub radio: RadioParams,
    pub econ: EconParams,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        self.econ.validate()?;
        for v in &self.vehicles {
            v.validate()?;
            if v.task.max_delay > self.econ.qos_shift {
                return Err(Error::InvalidScenario(format!(
                    "qos shift {} is below deadline {} of vehicle {}",
                    self.econ.qos_shift, v.task.max_delay, v.id
                )));
            }
        }
        for r in &self.rsus {
            if !(r.radius_m > 0.0 && r.es_capacity_hz >= 0.0) {
                return Err(Error::InvalidScenario(format!("bad RSU {}", r.id)));
            }
        }
        if self
            .rsus
            .windows(2)
            .any(|w| w[0].position_m > w[1].position_m)
        {
            return Err(Error::InvalidScenario(
                "RSUs must be sorted by position".into(),
            ));
        }
        let needs_pool = self
            .vehicles
            .iter()
            .any(|v| v.region == Region::Overlapping);
        match &self.pool {
            Some(pool) => {
                if pool.total_capacity_hz < 0.0 || pool.member_rsu_ids.is_empty() {
                    return Err(Error::InvalidScenario("pool must have members".into()));
                }
                let mut sum = 0.0;
                for id in &pool.member_rsu_ids {
                    sum += self.rsu(*id)?.es_capacity_hz;
                }
                if (sum - pool.total_capacity_hz).abs() > 1e-6 * sum.max(1.0) {
                    return Err(Error::InvalidScenario(format!(
                        "pool capacity {} differs from member sum {}",
                        pool.total_capacity_hz, sum
                    )));
                }
            }
            None if needs_pool => {
                return Err(Error::InvalidScenario(
                    "overlapping-region vehicles require a resource pool".into(),
                ))
            }
            None => {}
        }
        if self.vehicles.iter().any(|v| v.region == Region::General)
            && self.general_rsus().next().is_none()
        {
            return Err(Error::InvalidScenario(
                "general-region vehicles need at least one non-pool RSU".into(),
            ));
        }
        Ok(())
    }

    pub fn rsu(&self, id: u32) -> Result<&Rsu> {
        self.rsus
            .iter()
            .find(|r| r.id == id)
            .ok_or(Error::UnknownRsu(id))
    }

    pub fn is_pool_member(&self, id: u32) -> bool {
        self.pool
            .as_ref()
            .is_some_and(|p| p.member_rsu_ids.contains(&id))
    }

    /// RSUs a general-region vehicle may select (those not folded into the pool).
    pub fn general_rsus(&self) -> impl Iterator<Item = &Rsu> {
        self.rsus.iter().filter(|r| !self.is_pool_member(r.id))
    }

    pub fn pool_members(&self) -> impl Iterator<Item = &Rsu> {
        self.rsus.iter().filter(|r| self.is_pool_member(r.id))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }
}

/// Work moved while a general-region vehicle drives into coverage of its RSU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transit {
    pub move_time: f64,
    /// Bits processed locally during the move.
    pub local_bits: f64,
    /// Bits uploaded to the cloud during the move.
    pub cloud_bits: f64,
}

/// Per-vehicle offloading decision.
///
/// With `transit` present the ratios apply to the residual task left after the
/// move; otherwise they apply to the whole task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadDecision {
    pub vehicle_id: u32,
    pub alpha_e: f64,
    pub alpha_c: f64,
    /// Edge or pool resource allocated to the vehicle, cycles/s.
    pub resource: f64,
    /// Selected RSU id; `None` for pool-served vehicles.
    pub selection: Option<u32>,
    pub transit: Option<Transit>,
    pub feasible: bool,
}

impl OffloadDecision {
    pub fn local_only(vehicle_id: u32) -> Self {
        Self {
            vehicle_id,
            alpha_e: 0.0,
            alpha_c: 0.0,
            resource: 0.0,
            selection: None,
            transit: None,
            feasible: true,
        }
    }
}

/// Inclusive `[min, max]` range, serialised as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.max > self.min {
            rng.random_range(self.min..=self.max)
        } else {
            self.min
        }
    }
}

impl From<[f64; 2]> for Range {
    fn from(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }
}

impl From<Range> for [f64; 2] {
    fn from(r: Range) -> Self {
        [r.min, r.max]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    #[default]
    General,
    Overlapping,
}

/// How vehicles are placed along the road.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Placement {
    /// Uniform over the whole segment.
    #[default]
    Uniform,
    /// Uniform over `[from_m, to_m]`.
    Cluster { from_m: f64, to_m: f64 },
}

/// Parameters for [`generate_scenario`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub region: RegionKind,
    pub vehicles: usize,
    pub rsus: usize,
    pub road_length_m: f64,
    pub overlap_length_m: f64,
    pub rsu_radius_m: f64,
    pub es_capacity_hz: f64,
    /// Per-RSU capacities overriding `es_capacity_hz`.
    pub es_capacities_hz: Option<Vec<f64>>,
    pub speed_kmh: f64,
    pub local_cps: f64,
    pub tx_power_w: f64,
    pub data_mb: Range,
    pub cycles_per_bit: Range,
    pub max_delay_s: Range,
    pub placement: Placement,
    pub radio: RadioParams,
    pub econ: EconParams,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            region: RegionKind::General,
            vehicles: 10,
            rsus: 5,
            road_length_m: 250.0,
            overlap_length_m: 100.0,
            rsu_radius_m: 30.0,
            es_capacity_hz: 0.5e9,
            es_capacities_hz: None,
            speed_kmh: 40.0,
            local_cps: 12.5e6,
            tx_power_w: 0.1,
            data_mb: Range::new(10.0, 15.0),
            cycles_per_bit: Range::new(4.0, 8.0),
            max_delay_s: Range::new(4.0, 6.0),
            placement: Placement::Uniform,
            radio: RadioParams::default(),
            econ: EconParams::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vehicles == 0 {
            return Err(Error::InvalidConfig("at least one vehicle required".into()));
        }
        if self.rsus == 0 {
            return Err(Error::InvalidConfig("at least one RSU required".into()));
        }
        for (name, r) in [
            ("data_mb", self.data_mb),
            ("cycles_per_bit", self.cycles_per_bit),
            ("max_delay_s", self.max_delay_s),
        ] {
            if !(r.min <= r.max) || r.min <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "range {name} must satisfy 0 < min <= max, got [{}, {}]",
                    r.min, r.max
                )));
            }
        }
        if let Placement::Cluster { from_m, to_m } = self.placement {
            if !(from_m <= to_m) {
                return Err(Error::InvalidConfig("cluster range has from > to".into()));
            }
        }
        if let Some(caps) = &self.es_capacities_hz {
            if caps.len() != self.rsus {
                return Err(Error::InvalidConfig(format!(
                    "{} capacities given for {} RSUs",
                    caps.len(),
                    self.rsus
                )));
            }
        }
        if self.econ.qos_shift < self.max_delay_s.max {
            return Err(Error::InvalidConfig(format!(
                "qos_shift {} must be at least the largest deadline {}",
                self.econ.qos_shift, self.max_delay_s.max
            )));
        }
        self.radio.validate()?;
        self.econ.validate()?;
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: GenConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

/// Builds a deterministic scenario for `seed`.
///
/// General region: `rsus` RSUs evenly spaced along the road. Overlapping
/// region: the RSUs are spread over the overlap segment and their servers are
/// pooled.
pub fn generate_scenario(config: &GenConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (segment, region) = match config.region {
        RegionKind::General => (config.road_length_m, Region::General),
        RegionKind::Overlapping => (config.overlap_length_m, Region::Overlapping),
    };

    let spacing = segment / config.rsus as f64;
    let rsus: Vec<Rsu> = (0..config.rsus)
        .map(|j| Rsu {
            id: j as u32,
            position_m: (j as f64 + 0.5) * spacing,
            radius_m: config.rsu_radius_m,
            es_capacity_hz: config
                .es_capacities_hz
                .as_ref()
                .map_or(config.es_capacity_hz, |c| c[j]),
        })
        .collect();

    let pool = (config.region == RegionKind::Overlapping).then(|| ResourcePool {
        total_capacity_hz: rsus.iter().map(|r| r.es_capacity_hz).sum(),
        member_rsu_ids: rsus.iter().map(|r| r.id).collect(),
    });

    let (lo, hi) = match config.placement {
        Placement::Uniform => (0.0, segment),
        Placement::Cluster { from_m, to_m } => (from_m, to_m),
    };
    let mut positions: Vec<f64> = (0..config.vehicles)
        .map(|_| Range::new(lo, hi).sample(&mut rng))
        .collect();
    positions.sort_by(f64::total_cmp);

    let vehicles = positions
        .into_iter()
        .enumerate()
        .map(|(i, x)| Vehicle {
            id: i as u32,
            position_m: x,
            speed_mps: kmh_to_mps(config.speed_kmh),
            local_cps: config.local_cps,
            tx_power_w: config.tx_power_w,
            region,
            task: TaskSpec {
                data_bits: mb_to_bits(config.data_mb.sample(&mut rng)),
                cycles_per_bit: config.cycles_per_bit.sample(&mut rng),
                max_delay: config.max_delay_s.sample(&mut rng),
            },
        })
        .collect();

    let scenario = Scenario {
        vehicles,
        rsus,
        pool,
        radio: config.radio.clone(),
        econ: config.econ.clone(),
        seed,
    };
    scenario.validate()?;
    Ok(scenario)
}
