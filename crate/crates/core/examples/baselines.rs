//! MSCET against SGRR, Nearby and the two restricted cooperation modes on
//! the same scenarios.

use mscet::baselines::{run_cloud_terminal, run_edge_terminal, run_nearby, run_sgrr, SgrrConfig};
use mscet::schedule::run_mscet;
use mscet::solvers::SolverConfig;
use mscet::{generate_scenario, GenConfig};

fn main() -> mscet::Result<()> {
    let cfg = SolverConfig::default();
    println!("seed      MSCET       SGRR     Nearby    Edge-T    Cloud-T");
    for seed in 0..5 {
        let sc = generate_scenario(&GenConfig::default(), seed)?;
        println!(
            "{seed:4} {:10.3} {:10.3} {:10.3} {:9.3} {:10.3}",
            run_mscet(&sc, &cfg, None)?.utility(),
            run_sgrr(&sc, &SgrrConfig::default())?.utility(),
            run_nearby(&sc, &cfg)?.utility(),
            run_edge_terminal(&sc, &cfg)?.utility(),
            run_cloud_terminal(&sc, &cfg)?.utility(),
        );
    }
    Ok(())
}
