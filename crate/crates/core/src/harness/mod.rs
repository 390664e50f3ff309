//! Experiment driver: the convergence run, the three sweeps and single
//! simulations, written as CSV or JSON.
//!
//! CSV columns, in order:
//!
//! * convergence: `init_id, iteration, utility`
//! * radius sweep: `radius_m, schedule, placement, seeds, mean_utility, std_utility, mean_infeasible, violations`
//! * vehicle sweep: `vehicles, mode, seeds, mean_utility, std_utility, mean_infeasible, violations`
//! * pool comparison: `variant, pooled, vehicles, seeds, mean_utility, std_utility, mean_infeasible, violations`
//!
//! `mean_infeasible` is the mean number of vehicles flagged infeasible per
//! run. `violations` counts decisions that fail the constraint check without
//! being flagged, summed over seeds; it should always be zero.
//!
//! Seeds of one point are `seed, seed + 1, ...`. Runs execute on a worker
//! pool and are gathered in input order, so output does not depend on the
//! number of workers.

mod config;

pub use config::{
    ConvergenceConfig, ExperimentConfig, PoolCompareConfig, PoolVariant, RadiusSweepConfig,
    VehicleSweepConfig,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{run_nearby, run_sgrr};
use crate::error::{Error, Result};
use crate::scenario::{generate_scenario, GenConfig, Placement, RegionKind, Scenario};
use crate::schedule::{run_mscet, run_variant, InitPoint, ScheduleOutput, Variant};
use crate::utility::check_constraints;

/// Options shared by every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Worker threads; 0 picks the number of cores.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub init_id: usize,
    pub iteration: usize,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusRow {
    pub radius_m: f64,
    pub schedule: String,
    pub placement: String,
    pub seeds: usize,
    pub mean_utility: f64,
    pub std_utility: f64,
    pub mean_infeasible: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehicleRow {
    pub vehicles: usize,
    pub mode: String,
    pub seeds: usize,
    pub mean_utility: f64,
    pub std_utility: f64,
    pub mean_infeasible: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoolRow {
    pub variant: String,
    pub pooled: bool,
    pub vehicles: usize,
    pub seeds: usize,
    pub mean_utility: f64,
    pub std_utility: f64,
    pub mean_infeasible: f64,
    pub violations: usize,
}

/// Aggregate over the seeds of one sweep point.
#[derive(Debug, Clone, PartialEq)]
struct PointStats {
    seeds: usize,
    mean_utility: f64,
    /// Sample standard deviation; 0 for a single seed.
    std_utility: f64,
    mean_infeasible: f64,
    violations: usize,
}

/// Result of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub scenario: Scenario,
    pub schedule: ScheduleOutput,
    pub violations: usize,
}

/// Per-run summary before aggregation.
#[derive(Debug, Clone, Copy)]
struct RunSummary {
    utility: f64,
    infeasible: usize,
    violations: usize,
}

fn summarize(scenario: &Scenario, out: &ScheduleOutput) -> Result<RunSummary> {
    Ok(RunSummary {
        utility: out.utility(),
        infeasible: out.report.infeasible,
        violations: violations(scenario, out)?,
    })
}

/// Decisions that fail the constraint check but are not flagged.
fn violations(scenario: &Scenario, out: &ScheduleOutput) -> Result<usize> {
    let rep = check_constraints(&out.decisions, scenario)?;
    Ok(out
        .decisions
        .iter()
        .zip(&rep.vehicle_ok)
        .filter(|(d, ok)| d.feasible && !**ok)
        .count())
}

fn aggregate(runs: &[RunSummary]) -> PointStats {
    let n = runs.len();
    let mean = runs.iter().map(|r| r.utility).sum::<f64>() / n as f64;
    let std = if n > 1 {
        (runs.iter().map(|r| (r.utility - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    PointStats {
        seeds: n,
        mean_utility: mean,
        std_utility: std,
        mean_infeasible: runs.iter().map(|r| r.infeasible as f64).sum::<f64>() / n as f64,
        violations: runs.iter().map(|r| r.violations).sum(),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

/// Runs `job` for every item on the pool and returns results in item order.
fn run_parallel<T, R, F>(workers: usize, items: &[T], job: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    pool(workers)?.install(|| items.par_iter().map(&job).collect())
}

fn placement_name(p: &Placement) -> String {
    match p {
        Placement::Uniform => "uniform".into(),
        Placement::Cluster { from_m, to_m } => format!("cluster[{from_m}-{to_m}]"),
    }
}

/// Outer-loop utility from each initial point on the scenario for `opts.seed`.
/// Init 0 is the uniform point, the rest are random.
pub fn cmd_convergence(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let scenario = generate_scenario(&cfg.scenario, opts.seed)?;
    let n = scenario.vehicles.len();
    let c = &cfg.convergence;
    let mut inits = vec![InitPoint::uniform(n, c.init_alpha_e, c.init_alpha_c)];
    for k in 0..c.random_inits {
        inits.push(InitPoint::random(n, opts.seed.wrapping_add(k as u64 + 1)));
    }
    let outs = run_parallel(opts.workers, &inits, |init| {
        run_mscet(&scenario, &cfg.solver, Some(init))
    })?;
    let mut rows = Vec::new();
    for (init_id, out) in outs.iter().enumerate() {
        for (k, u) in out.outer_utilities().into_iter().enumerate() {
            rows.push(ConvergenceRow {
                init_id,
                iteration: k + 1,
                utility: u,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy)]
enum RadiusSchedule {
    Mscet,
    Sgrr,
    Nearby,
}

impl RadiusSchedule {
    fn name(self) -> &'static str {
        match self {
            RadiusSchedule::Mscet => "MSCET",
            RadiusSchedule::Sgrr => "SGRR",
            RadiusSchedule::Nearby => "Nearby",
        }
    }
}

/// MSCET, SGRR and Nearby over the radius grid. Nearby runs on the
/// configured placement for it; the other two on the scenario's own.
pub fn cmd_radius_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<RadiusRow>> {
    cfg.validate()?;
    let mut points = Vec::new();
    for &radius in &cfg.radius_sweep.radii_m {
        for sched in [
            RadiusSchedule::Mscet,
            RadiusSchedule::Sgrr,
            RadiusSchedule::Nearby,
        ] {
            let placement = match sched {
                RadiusSchedule::Nearby => cfg.radius_sweep.nearby_placement,
                _ => cfg.scenario.placement,
            };
            let gen = GenConfig {
                rsu_radius_m: radius,
                placement,
                ..cfg.scenario.clone()
            };
            points.push((radius, sched, gen));
        }
    }
    let jobs = expand_seeds(&points, cfg.seeds_per_point, opts.seed);
    let runs = run_parallel(opts.workers, &jobs, |&(p, seed)| {
        let (_, sched, gen) = &points[p];
        let sc = generate_scenario(gen, seed)?;
        let out = match sched {
            RadiusSchedule::Mscet => run_mscet(&sc, &cfg.solver, None)?,
            RadiusSchedule::Sgrr => run_sgrr(&sc, &cfg.sgrr)?,
            RadiusSchedule::Nearby => run_nearby(&sc, &cfg.solver)?,
        };
        summarize(&sc, &out)
    })?;
    Ok(points
        .iter()
        .zip(runs.chunks(cfg.seeds_per_point))
        .map(|((radius, sched, gen), chunk)| {
            let s = aggregate(chunk);
            RadiusRow {
                radius_m: *radius,
                schedule: sched.name().into(),
                placement: placement_name(&gen.placement),
                seeds: s.seeds,
                mean_utility: s.mean_utility,
                std_utility: s.std_utility,
                mean_infeasible: s.mean_infeasible,
                violations: s.violations,
            }
        })
        .collect())
}

/// MSCET, Edge-Terminal and Cloud-Terminal over the vehicle grid.
pub fn cmd_vehicle_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<VehicleRow>> {
    cfg.validate()?;
    let modes = [
        ("MSCET", Variant::mscet()),
        ("Edge-Terminal", Variant::edge_terminal()),
        ("Cloud-Terminal", Variant::cloud_terminal()),
    ];
    let mut points = Vec::new();
    for &n in &cfg.vehicle_sweep.vehicles {
        for (m, _) in modes.iter().enumerate() {
            points.push((
                n,
                m,
                GenConfig {
                    vehicles: n,
                    ..cfg.scenario.clone()
                },
            ));
        }
    }
    let jobs = expand_seeds(&points, cfg.seeds_per_point, opts.seed);
    let runs = run_parallel(opts.workers, &jobs, |&(p, seed)| {
        let (_, m, gen) = &points[p];
        let sc = generate_scenario(gen, seed)?;
        let out = run_variant(&sc, &cfg.solver, &modes[*m].1, None)?;
        summarize(&sc, &out)
    })?;
    Ok(points
        .iter()
        .zip(runs.chunks(cfg.seeds_per_point))
        .map(|((n, m, _), chunk)| {
            let s = aggregate(chunk);
            VehicleRow {
                vehicles: *n,
                mode: modes[*m].0.into(),
                seeds: s.seeds,
                mean_utility: s.mean_utility,
                std_utility: s.std_utility,
                mean_infeasible: s.mean_infeasible,
                violations: s.violations,
            }
        })
        .collect())
}

/// Overlapping region, each capacity variant with and without the pool.
/// Without it, a vehicle uses its nearest member ES and that ES's own budget.
pub fn cmd_pool_compare(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<PoolRow>> {
    cfg.validate()?;
    let pc = &cfg.pool_compare;
    let mut points = Vec::new();
    for v in &pc.variants {
        for pooled in [true, false] {
            let gen = GenConfig {
                region: RegionKind::Overlapping,
                vehicles: pc.vehicles,
                rsus: v.capacities_hz.len(),
                es_capacities_hz: Some(v.capacities_hz.clone()),
                ..cfg.scenario.clone()
            };
            points.push((v.name.clone(), pooled, gen));
        }
    }
    let jobs = expand_seeds(&points, cfg.seeds_per_point, opts.seed);
    let runs = run_parallel(opts.workers, &jobs, |&(p, seed)| {
        let (_, pooled, gen) = &points[p];
        let sc = generate_scenario(gen, seed)?;
        let variant = if *pooled {
            Variant::mscet()
        } else {
            Variant::unpooled()
        };
        let out = run_variant(&sc, &cfg.solver, &variant, None)?;
        summarize(&sc, &out)
    })?;
    Ok(points
        .iter()
        .zip(runs.chunks(cfg.seeds_per_point))
        .map(|((name, pooled, _), chunk)| {
            let s = aggregate(chunk);
            PoolRow {
                variant: name.clone(),
                pooled: *pooled,
                vehicles: pc.vehicles,
                seeds: s.seeds,
                mean_utility: s.mean_utility,
                std_utility: s.std_utility,
                mean_infeasible: s.mean_infeasible,
                violations: s.violations,
            }
        })
        .collect())
}

/// One MSCET run on the scenario for `opts.seed`.
pub fn cmd_simulate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SimulationReport> {
    cfg.validate()?;
    let scenario = generate_scenario(&cfg.scenario, opts.seed)?;
    let schedule = run_mscet(&scenario, &cfg.solver, None)?;
    let violations = violations(&scenario, &schedule)?;
    Ok(SimulationReport {
        seed: opts.seed,
        scenario,
        schedule,
        violations,
    })
}

fn expand_seeds<P>(points: &[P], seeds: usize, base: u64) -> Vec<(usize, u64)> {
    (0..points.len())
        .flat_map(|p| (0..seeds as u64).map(move |s| (p, base.wrapping_add(s))))
        .collect()
}

/// Writes rows as CSV with a header line.
pub fn write_csv<T: Serialize, W: std::io::Write>(rows: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize, W: std::io::Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}
