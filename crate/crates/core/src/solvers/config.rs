use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the cloud ratio subproblem is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlphaCMethod {
    #[default]
    Genetic,
    /// Bisection on the derivative; exact for the concave scalar problem.
    Bisection,
}

/// Hyperparameters of the three subproblem solvers and the alternating loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub ga_population: usize,
    pub ga_generations: usize,
    pub ga_tournament: usize,
    pub ga_crossover_rate: f64,
    pub ga_mutation_rate: f64,
    /// Mutation step as a fraction of the feasible interval.
    pub ga_mutation_sigma: f64,
    pub ga_elitism: usize,
    pub alpha_c_method: AlphaCMethod,
    pub penalty_r0: f64,
    pub penalty_decay: f64,
    /// Penalty weight below which the iterates may be declared converged.
    /// Early on the barriers balance each other and the iterates barely move.
    pub penalty_r_min: f64,
    /// Stop when successive penalty iterates move less than this fraction of
    /// the budget.
    pub ipm_tolerance: f64,
    pub newton_max_iters: usize,
    /// Convergence threshold on the change of system utility.
    pub outer_tolerance: f64,
    pub max_outer_iters: usize,
    pub max_mid_iters: usize,
    pub max_inner_iters: usize,
    /// After each edge-ratio step, shift share between edge and cloud at a
    /// fixed offloaded total to cut the delay. Off gives the plain
    /// alternation.
    pub rebalance: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ga_population: 64,
            ga_generations: 100,
            ga_tournament: 3,
            ga_crossover_rate: 0.9,
            ga_mutation_rate: 0.1,
            ga_mutation_sigma: 0.05,
            ga_elitism: 2,
            alpha_c_method: AlphaCMethod::Genetic,
            penalty_r0: 1.0,
            penalty_decay: 0.1,
            penalty_r_min: 1e-7,
            ipm_tolerance: 1e-4,
            newton_max_iters: 60,
            outer_tolerance: 1e-3,
            max_outer_iters: 10,
            max_mid_iters: 10,
            max_inner_iters: 30,
            rebalance: true,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("ga_population", self.ga_population),
            ("ga_generations", self.ga_generations),
            ("ga_tournament", self.ga_tournament),
            ("newton_max_iters", self.newton_max_iters),
            ("max_outer_iters", self.max_outer_iters),
            ("max_mid_iters", self.max_mid_iters),
            ("max_inner_iters", self.max_inner_iters),
        ];
        for (name, c) in counts {
            if c == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.ga_elitism > self.ga_population {
            return Err(Error::InvalidConfig("ga_elitism exceeds population".into()));
        }
        for (name, r) in [
            ("ga_crossover_rate", self.ga_crossover_rate),
            ("ga_mutation_rate", self.ga_mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        if !(self.penalty_r0 > 0.0
            && self.penalty_decay > 0.0
            && self.penalty_decay < 1.0
            && self.penalty_r_min > 0.0
            && self.ipm_tolerance > 0.0
            && self.outer_tolerance > 0.0
            && self.ga_mutation_sigma > 0.0)
        {
            return Err(Error::InvalidConfig(
                "penalty, tolerance and mutation parameters must be positive, decay below 1".into(),
            ));
        }
        Ok(())
    }
}
