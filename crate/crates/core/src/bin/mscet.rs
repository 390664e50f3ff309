use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mscet::harness::{
    cmd_convergence, cmd_pool_compare, cmd_radius_sweep, cmd_simulate, cmd_vehicle_sweep,
    write_csv, write_json, ExperimentConfig, RunOptions,
};
use mscet::Error;

#[derive(Parser)]
#[command(
    name = "mscet",
    version,
    about = "Cloud-edge-terminal offloading experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outer-loop utility per iteration from several initial points (CSV).
    Convergence(Common),
    /// MSCET, SGRR and Nearby over RSU coverage radii (CSV).
    RadiusSweep(Common),
    /// MSCET, Edge-Terminal and Cloud-Terminal over vehicle counts (CSV).
    VehicleSweep(Common),
    /// Pooled and unpooled overlapping-region resource variants (CSV).
    PoolCompare(Common),
    /// One scheduling run with the full report (JSON).
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON). Defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Overrides the config's seeds per sweep point.
    #[arg(long)]
    seeds_per_point: Option<usize>,
}

fn load(c: &Common) -> Result<(ExperimentConfig, RunOptions), Error> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seeds_per_point {
        cfg.seeds_per_point = s;
    }
    cfg.validate()?;
    Ok((
        cfg,
        RunOptions {
            seed: c.seed,
            workers: c.workers,
        },
    ))
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Convergence(c) => {
            let (cfg, opts) = load(&c)?;
            write_csv(&cmd_convergence(&cfg, &opts)?, sink(&c.out)?)
        }
        Command::RadiusSweep(c) => {
            let (cfg, opts) = load(&c)?;
            write_csv(&cmd_radius_sweep(&cfg, &opts)?, sink(&c.out)?)
        }
        Command::VehicleSweep(c) => {
            let (cfg, opts) = load(&c)?;
            write_csv(&cmd_vehicle_sweep(&cfg, &opts)?, sink(&c.out)?)
        }
        Command::PoolCompare(c) => {
            let (cfg, opts) = load(&c)?;
            write_csv(&cmd_pool_compare(&cfg, &opts)?, sink(&c.out)?)
        }
        Command::Simulate(c) => {
            let (cfg, opts) = load(&c)?;
            let mut w = sink(&c.out)?;
            write_json(&cmd_simulate(&cfg, &opts)?, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn error_record(kind: &str, message: &str) -> ExitCode {
    let rec = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{rec}");
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return error_record("usage", e.to_string().trim_end()),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => error_record(e.kind(), &e.to_string()),
    }
}
