//! True processing delay next to its two linear surrogates for a few splits.

use mscet::latency::{cs_upper_bound, es_upper_bound, processing_delay};
use mscet::radio::{serving_antennas, uplink_rates};
use mscet::schedule::default_init;
use mscet::{generate_scenario, GenConfig};

fn main() -> mscet::Result<()> {
    let scenario = generate_scenario(
        &GenConfig {
            vehicles: 3,
            ..GenConfig::default()
        },
        1,
    )?;
    let init = default_init(&scenario)?;
    let sel: Vec<_> = init.iter().map(|d| d.selection).collect();
    let rates = uplink_rates(&scenario, &serving_antennas(&scenario, &sel))?;
    let v = &scenario.vehicles[0];
    for (ae, ac) in [(0.2, 0.2), (0.4, 0.4), (0.7, 0.2), (0.1, 0.8)] {
        let d = mscet::OffloadDecision {
            alpha_e: ae,
            alpha_c: ac,
            ..init[0].clone()
        };
        let t = processing_delay(&d, &scenario, v, rates[0])?;
        let cs = cs_upper_bound(&d, &scenario, v, rates[0])?.bound;
        let es = es_upper_bound(&d, &scenario, v, rates[0], 1.0)?.bound;
        println!("ae {ae:.1} ac {ac:.1}: delay {t:.3} s, cloud bound {cs:.3}, edge bound {es:.3}");
    }
    Ok(())
}
