//! Overlapping region with and without the shared resource pool, for a
//! resource-rich layout and two with starved servers.

use mscet::harness::{cmd_pool_compare, write_csv, ExperimentConfig, RunOptions};

fn main() -> mscet::Result<()> {
    let cfg = ExperimentConfig {
        seeds_per_point: 3,
        ..ExperimentConfig::default()
    };
    let rows = cmd_pool_compare(&cfg, &RunOptions::default())?;
    write_csv(&rows, std::io::stdout())
}
