//! Simulation-in-the-loop search for the cheapest hardware that meets a rate target.
//!
//! Cost is `w1 (1 + ΔR)² Θ(ΔR) + w2 · hardware_cost` with `ΔR = target − achieved`
//! and `Θ(0) = 0`. Everything here is `f64`: `w1 = 10¹⁰⁰` does not fit in `f32`.

mod genetic;
mod local;

use std::fmt;

use thiserror::Error;

use crate::estimate::{estimate_metric, EstimateError, McSettings};
use crate::fibergrid::{
    baseline_survival_prob, enumerate_placements, max_feasible_repeaters, select_configuration, FiberPath,
    PathError, PlacementTable,
};
use crate::hardware::{hardware_cost, value_for_factor, CostBreakdown, HardwareError, HardwareParams, Parameter, PathContext};
use crate::metrics::Metric;
use crate::sim::{derive_seed, SimConfig, SimError};

pub use genetic::{genetic_search, GenerationRecord, OptimizationResult};
pub use local::{local_search, LocalSearchResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("infeasible bounds: {0}")]
    InfeasibleBounds(String),
    #[error(transparent)]
    Hardware(#[from] HardwareError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

pub type Result<T> = std::result::Result<T, OptimizerError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    /// `w1`, multiplies the unmet-target penalty.
    pub penalty: f64,
    /// `w2`, multiplies the hardware cost.
    pub hardware: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self { penalty: 1e100, hardware: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    /// Range of every improvement factor.
    pub factor: (f64, f64),
    pub modes_cap: u64,
    /// Inclusive repeater-count range; 0 is the direct link.
    pub repeaters: (usize, usize),
    /// Range of the cut-off as a fraction of the coherence time.
    pub cutoff_fraction: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            factor: (1.0, 1000.0),
            modes_cap: 1_000_000,
            repeaters: (1, 7),
            cutoff_fraction: (1e-3, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub weights: Weights,
    pub target_rate: f64,
    pub target_metric: Metric,
    pub population_size: usize,
    pub generations: usize,
    /// Standard deviation of Gaussian mutation in ln-factor space.
    pub mutation_scale: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    pub tournament_size: usize,
    pub elitism_count: usize,
    pub sims_per_eval: usize,
    pub pairs_per_sim: usize,
    pub rng_seed: u64,
    pub bounds: Bounds,
    /// When false the cut-off is disabled for every candidate.
    pub optimize_cutoff: bool,
    /// Per-run simulated-time budget, in units of `pairs_per_sim / target_rate`.
    pub time_limit_factor: f64,
    /// Per-run simulated-time budget when the target is zero.
    pub max_sim_time: f64,
    /// Multiplicative step of the local search in factor space.
    pub local_step: f64,
    /// Maximum number of evaluations the local search may spend.
    pub local_budget: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            weights: Weights::default(),
            target_rate: 10.0,
            target_metric: Metric::Skr,
            population_size: 32,
            generations: 30,
            mutation_scale: 0.2,
            mutation_rate: 0.3,
            crossover_rate: 0.9,
            tournament_size: 3,
            elitism_count: 1,
            sims_per_eval: 100,
            pairs_per_sim: 2,
            rng_seed: 0,
            bounds: Bounds::default(),
            optimize_cutoff: true,
            time_limit_factor: 100.0,
            max_sim_time: 100.0,
            local_step: 1.1,
            local_budget: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(OptimizerError::InfeasibleBounds(msg.to_string()));
        let (lo, hi) = self.bounds.factor;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("factor bounds must satisfy 0 < low <= high < inf");
        }
        if self.bounds.modes_cap == 0 {
            return bad("modes cap must be at least 1");
        }
        let (clo, chi) = self.bounds.cutoff_fraction;
        if !(clo > 0.0 && clo <= chi) {
            return bad("cut-off fraction bounds must satisfy 0 < low <= high");
        }
        if self.bounds.repeaters.0 > self.bounds.repeaters.1 {
            return bad("repeater range is empty");
        }
        if self.population_size == 0 || self.tournament_size == 0 {
            return bad("population and tournament sizes must be positive");
        }
        if self.elitism_count > self.population_size {
            return bad("elitism count exceeds population size");
        }
        if self.sims_per_eval == 0 || self.pairs_per_sim == 0 {
            return bad("sims_per_eval and pairs_per_sim must be positive");
        }
        if self.target_metric == Metric::Bqc && self.pairs_per_sim % 2 == 1 {
            return bad("pairs_per_sim must be even for the bqc metric");
        }
        if !(self.target_rate >= 0.0) || !self.target_rate.is_finite() {
            return bad("target rate must be finite and non-negative");
        }
        if !(self.local_step > 1.0) {
            return bad("local step must exceed 1");
        }
        Ok(())
    }

    /// Seed shared by every evaluation so candidates are compared on common random numbers.
    pub fn evaluation_seed(&self) -> u64 {
        derive_seed(self.rng_seed, u64::MAX)
    }

    fn time_limit(&self) -> f64 {
        if self.target_rate > 0.0 {
            self.time_limit_factor * self.pairs_per_sim as f64 / self.target_rate
        } else {
            self.max_sim_time
        }
    }
}

/// A fiber path together with its placement table and cost context.
#[derive(Debug, Clone)]
pub struct Problem {
    pub path: FiberPath<f64>,
    pub table: PlacementTable<f64>,
    pub context: PathContext<f64>,
}

impl Problem {
    pub fn new(path: FiberPath<f64>, max_repeaters: usize) -> Self {
        let table = enumerate_placements(&path, max_repeaters);
        let context = PathContext::new(baseline_survival_prob(&path));
        Self { path, table, context }
    }

    /// Repeater counts within `bounds` that have at least one placement.
    pub fn admissible_repeaters(&self, bounds: &Bounds) -> Vec<usize> {
        (bounds.repeaters.0..=bounds.repeaters.1.min(max_feasible_repeaters(self.path.num_sites())))
            .filter(|&r| if r == 0 { self.table.direct().is_some() } else { self.table.count(r) > 0 })
            .collect()
    }

    /// Largest mode count allowed by both the cap and the factor bound.
    pub fn modes_limit(&self, bounds: &Bounds) -> u64 {
        let by_factor = value_for_factor(Parameter::NumModes, bounds.factor.1, &self.context);
        let by_factor = if by_factor.is_finite() { by_factor.floor().max(1.0) as u64 } else { u64::MAX };
        bounds.modes_cap.min(by_factor).max(1)
    }
}

/// A point in the search space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub params: HardwareParams<f64>,
    pub r: usize,
    /// Placement selector in `[0, 1]`.
    pub a: f64,
    /// Cut-off as a fraction of the coherence time; `None` disables it.
    pub cutoff_fraction: Option<f64>,
}

impl Candidate {
    pub fn baseline(r: usize) -> Self {
        Self {
            params: HardwareParams::baseline(),
            r,
            a: 0.5,
            cutoff_fraction: None,
        }
    }

    pub fn cutoff_time(&self) -> f64 {
        self.cutoff_fraction
            .map_or(f64::INFINITY, |f| f * self.params.coherence_time)
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        write!(
            f,
            "T={} n={} F={} p_det={} s_q={} r={} a={} cutoff=",
            p.coherence_time, p.num_modes, p.link_fidelity, p.detection_prob, p.swap_quality, self.r, self.a
        )?;
        match self.cutoff_fraction {
            Some(c) => write!(f, "{c}T"),
            None => f.write_str("inf"),
        }
    }
}

/// Unmet-target penalty and weighted total for given hardware.
pub fn total_cost(
    candidate: &Candidate,
    achieved_rate: f64,
    target_rate: f64,
    weights: &Weights,
    context: &PathContext<f64>,
) -> Result<CostBreakdown<f64>> {
    let breakdown = hardware_cost(&candidate.params, context)?;
    let shortfall = target_rate - achieved_rate;
    // Θ(0) = 0: exactly meeting the target is free
    let penalty = if shortfall > 0.0 {
        weights.penalty * (1.0 + shortfall).powi(2)
    } else {
        0.0
    };
    Ok(breakdown.with_penalty(penalty, weights.hardware))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub candidate: Candidate,
    pub achieved_rate: f64,
    pub cost: CostBreakdown<f64>,
    /// Rank of the chosen placement among those with `r` repeaters.
    pub placement_rank: usize,
    pub repeater_sites: Vec<usize>,
}

/// Simulates the candidate `sims_per_eval` times and prices the result.
pub fn evaluate(candidate: &Candidate, config: &OptimizerConfig, problem: &Problem) -> Result<Evaluation> {
    let chain = select_configuration(&problem.table, candidate.r, candidate.a)?;
    let placement_rank = if candidate.r == 0 {
        0
    } else {
        crate::fibergrid::rank_for_selector(candidate.a, problem.table.count(candidate.r))
    };
    let sim = SimConfig::new(chain.clone(), candidate.params, config.pairs_per_sim, 0)
        .with_cutoff(candidate.cutoff_time());
    let settings = McSettings {
        runs: config.sims_per_eval,
        pairs_per_run: config.pairs_per_sim,
        base_seed: config.evaluation_seed(),
        time_limit: config.time_limit(),
    };
    let estimate = estimate_metric(&sim, config.target_metric, &settings)?;
    let achieved_rate = estimate.value();
    let cost = total_cost(candidate, achieved_rate, config.target_rate, &config.weights, &problem.context)?;
    Ok(Evaluation {
        candidate: *candidate,
        achieved_rate,
        cost,
        placement_rank,
        repeater_sites: chain.repeater_sites().to_vec(),
    })
}
