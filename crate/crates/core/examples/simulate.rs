//! One scheduling run on a generated scenario, printed per vehicle.

use mscet::schedule::run_mscet;
use mscet::solvers::SolverConfig;
use mscet::{generate_scenario, GenConfig};

fn main() -> mscet::Result<()> {
    let scenario = generate_scenario(&GenConfig::default(), 7)?;
    let out = run_mscet(&scenario, &SolverConfig::default(), None)?;
    out.report.write_vehicle_csv(std::io::stdout())?;
    println!(
        "system utility {:.3}, {} infeasible, {} outer iterations, converged {}",
        out.utility(),
        out.report.infeasible,
        out.outer_iterations,
        out.converged
    );
    Ok(())
}
