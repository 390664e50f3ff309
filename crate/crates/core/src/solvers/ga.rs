//! Real-coded genetic algorithm for the cloud ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{bisection_maximize, AlphaCMethod, RatioProblem, RatioSolution, SolverConfig};
use crate::scenario::EconParams;

/// Seed of the per-vehicle generator, mixed from the run seed and vehicle id.
pub fn vehicle_seed(seed: u64, vehicle_id: u32) -> u64 {
    let mut z = seed ^ (u64::from(vehicle_id).wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Maximises one scalar ratio problem over its feasible interval.
///
/// The population starts with both interval ends plus uniform samples;
/// offspring come from tournament selection, arithmetic crossover and
/// Gaussian mutation, clamped back into the interval.
pub fn ga_maximize(
    p: &RatioProblem,
    econ: &EconParams,
    cfg: &SolverConfig,
    rng: &mut ChaCha8Rng,
) -> RatioSolution {
    let Some((lo, hi)) = p.feasible_interval() else {
        return RatioSolution {
            value: p.least_violating(),
            feasible: false,
        };
    };
    if hi - lo <= f64::EPSILON {
        return RatioSolution {
            value: lo,
            feasible: true,
        };
    }
    let width = hi - lo;
    let noise = Normal::new(0.0, cfg.ga_mutation_sigma * width).expect("positive sigma");
    let fitness = |x: f64| p.objective(x, econ);

    let size = cfg.ga_population.max(2);
    let mut pop: Vec<f64> = Vec::with_capacity(size);
    pop.push(lo);
    pop.push(hi);
    while pop.len() < size {
        pop.push(rng.random_range(lo..=hi));
    }
    let mut fit: Vec<f64> = pop.iter().map(|&x| fitness(x)).collect();

    let tournament = |fit: &[f64], rng: &mut ChaCha8Rng| -> usize {
        let mut best = rng.random_range(0..fit.len());
        for _ in 1..cfg.ga_tournament {
            let c = rng.random_range(0..fit.len());
            if fit[c] > fit[best] {
                best = c;
            }
        }
        best
    };

    for _ in 0..cfg.ga_generations {
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| fit[b].total_cmp(&fit[a]).then(a.cmp(&b)));
        let mut next: Vec<f64> = order.iter().take(cfg.ga_elitism).map(|&i| pop[i]).collect();
        while next.len() < size {
            let a = pop[tournament(&fit, rng)];
            let b = pop[tournament(&fit, rng)];
            let mut child = if rng.random::<f64>() < cfg.ga_crossover_rate {
                let w: f64 = rng.random();
                w * a + (1.0 - w) * b
            } else {
                a
            };
            if rng.random::<f64>() < cfg.ga_mutation_rate {
                child += noise.sample(rng);
            }
            next.push(child.clamp(lo, hi));
        }
        pop = next;
        fit = pop.iter().map(|&x| fitness(x)).collect();
    }

    let mut best = 0;
    for i in 1..pop.len() {
        if fit[i] > fit[best] || (fit[i] == fit[best] && pop[i] < pop[best]) {
            best = i;
        }
    }
    RatioSolution {
        value: pop[best],
        feasible: true,
    }
}

/// Solves the cloud ratio for every vehicle independently. `ids` seeds each
/// vehicle's generator so results do not depend on vehicle order.
pub fn ga_solve_alpha_c(
    problems: &[RatioProblem],
    ids: &[u32],
    econ: &EconParams,
    cfg: &SolverConfig,
) -> Vec<RatioSolution> {
    problems
        .iter()
        .zip(ids)
        .map(|(p, &id)| match cfg.alpha_c_method {
            AlphaCMethod::Genetic => {
                let mut rng = ChaCha8Rng::seed_from_u64(vehicle_seed(cfg.seed, id));
                ga_maximize(p, econ, cfg, &mut rng)
            }
            AlphaCMethod::Bisection => bisection_maximize(p, econ),
        })
        .collect()
}
