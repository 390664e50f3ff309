//! MSCET, SGRR and Nearby over RSU coverage radii, three seeds per point.

use mscet::harness::{cmd_radius_sweep, write_csv, ExperimentConfig, RunOptions};

fn main() -> mscet::Result<()> {
    let cfg = ExperimentConfig {
        seeds_per_point: 3,
        ..ExperimentConfig::default()
    };
    let rows = cmd_radius_sweep(&cfg, &RunOptions::default())?;
    write_csv(&rows, std::io::stdout())
}
