//! Outer-loop utility from a uniform and three random starting points.

use mscet::harness::{cmd_convergence, write_csv, ExperimentConfig, RunOptions};

fn main() -> mscet::Result<()> {
    let cfg = ExperimentConfig::default();
    let rows = cmd_convergence(&cfg, &RunOptions::default())?;
    write_csv(&rows, std::io::stdout())
}
