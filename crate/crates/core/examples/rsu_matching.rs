//! RSU selection for the general region: distance weights, slot replication
//! and the Kuhn-Munkres matching, checked against enumeration.

use mscet::assignment::{
    build_weight_matrix, km_min_weight_matching, matching_weight, replicate_slots, select_rsus,
};
use mscet::oracle::brute_force_matching;
use mscet::{generate_scenario, GenConfig};

fn main() -> mscet::Result<()> {
    let scenario = generate_scenario(
        &GenConfig {
            vehicles: 6,
            rsus: 3,
            ..GenConfig::default()
        },
        4,
    )?;
    let weights = build_weight_matrix(&scenario.vehicles, &scenario.rsus);
    let slots = replicate_slots(&weights, 2);
    let km = km_min_weight_matching(&slots)?;
    let (_, best) = brute_force_matching(&slots)?;
    println!(
        "KM weight {:.3}, enumeration {:.3}",
        matching_weight(&slots, &km),
        best
    );

    for (v, sel) in scenario.vehicles.iter().zip(select_rsus(&scenario)?) {
        println!(
            "vehicle {} at {:6.1} m -> RSU {:?}",
            v.id, v.position_m, sel
        );
    }
    Ok(())
}
