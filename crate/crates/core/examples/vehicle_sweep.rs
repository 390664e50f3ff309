//! The three cooperation modes as the number of vehicles grows.

use mscet::harness::{cmd_vehicle_sweep, write_csv, ExperimentConfig, RunOptions};

fn main() -> mscet::Result<()> {
    let cfg = ExperimentConfig {
        seeds_per_point: 3,
        ..ExperimentConfig::default()
    };
    let rows = cmd_vehicle_sweep(&cfg, &RunOptions::default())?;
    write_csv(&rows, std::io::stdout())
}
