use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{evaluate, Candidate, Evaluation, OptimizerConfig, OptimizerError, Problem, Result};
use crate::hardware::{value_for_factor, HardwareParams, Parameter};

/// Continuous hardware genes, stored as `ln(improvement factor)`.
const FACTOR_GENES: [Parameter; 4] = [
    Parameter::CoherenceTime,
    Parameter::LinkFidelity,
    Parameter::DetectionProb,
    Parameter::SwapQuality,
];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Genome {
    ln_factors: [f64; 4],
    ln_modes: f64,
    /// Index into the admissible repeater counts.
    r_index: usize,
    a: f64,
    ln_cutoff: f64,
}

/// Gene ranges resolved against a problem.
struct Space {
    ln_factor: (f64, f64),
    ln_modes_max: f64,
    repeaters: Vec<usize>,
    ln_cutoff: (f64, f64),
    optimize_cutoff: bool,
}

impl Space {
    fn new(config: &OptimizerConfig, problem: &Problem) -> Result<Self> {
        config.validate()?;
        let repeaters = problem.admissible_repeaters(&config.bounds);
        if repeaters.is_empty() {
            return Err(OptimizerError::InfeasibleBounds(format!(
                "no placement with {}..={} repeaters on this path",
                config.bounds.repeaters.0, config.bounds.repeaters.1
            )));
        }
        let (flo, fhi) = config.bounds.factor;
        let (clo, chi) = config.bounds.cutoff_fraction;
        Ok(Self {
            ln_factor: (flo.ln(), fhi.ln()),
            ln_modes_max: (problem.modes_limit(&config.bounds) as f64).ln(),
            repeaters,
            ln_cutoff: (clo.ln(), chi.ln()),
            optimize_cutoff: config.optimize_cutoff,
        })
    }

    fn clamp(&self, mut g: Genome) -> Genome {
        for x in &mut g.ln_factors {
            *x = x.clamp(self.ln_factor.0, self.ln_factor.1);
        }
        g.ln_modes = g.ln_modes.clamp(0.0, self.ln_modes_max);
        g.r_index = g.r_index.min(self.repeaters.len() - 1);
        g.a = g.a.clamp(0.0, 1.0);
        g.ln_cutoff = g.ln_cutoff.clamp(self.ln_cutoff.0, self.ln_cutoff.1);
        g
    }

    fn decode(&self, g: &Genome, problem: &Problem) -> Candidate {
        let mut params = HardwareParams::baseline();
        for (p, ln_k) in FACTOR_GENES.iter().zip(g.ln_factors) {
            params = params.with_value(*p, value_for_factor(*p, ln_k.exp(), &problem.context));
        }
        // keep probabilities strictly below 1 so every factor stays finite
        let below_one = 1.0 - f64::EPSILON;
        params.link_fidelity = params.link_fidelity.min(below_one);
        params.detection_prob = params.detection_prob.min(below_one);
        params.swap_quality = params.swap_quality.min(below_one);
        params.num_modes = (g.ln_modes.exp().round() as u64).clamp(1, self.ln_modes_max.exp().round() as u64);
        Candidate {
            params,
            r: self.repeaters[g.r_index],
            a: g.a,
            cutoff_fraction: self.optimize_cutoff.then(|| g.ln_cutoff.exp()),
        }
    }

    /// Every factor at its lower bound, one mode, mid placement, longest cut-off.
    fn cheapest(&self) -> Genome {
        Genome {
            ln_factors: [self.ln_factor.0; 4],
            ln_modes: 0.0,
            r_index: self.repeaters.len() - 1,
            a: 0.5,
            ln_cutoff: self.ln_cutoff.1,
        }
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Genome {
        let mut ln_factors = [0.0; 4];
        for x in &mut ln_factors {
            // biased towards cheap hardware: |N(0, 1)| above the lower bound
            let z: f64 = rng.sample(StandardNormal);
            *x = self.ln_factor.0 + z.abs();
        }
        self.clamp(Genome {
            ln_factors,
            ln_modes: rng.random_range(0.0..=self.ln_modes_max),
            r_index: rng.random_range(0..self.repeaters.len()),
            a: rng.random_range(0.0..=1.0),
            ln_cutoff: rng.random_range(self.ln_cutoff.0..=self.ln_cutoff.1),
        })
    }
}

/// Best cost after each generation; generation 0 is the initial population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_cost: f64,
    pub best_hardware_cost: f64,
    pub best_rate: f64,
    /// Members of the population that meet the target.
    pub feasible: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: Evaluation,
    pub history: Vec<GenerationRecord>,
    pub evaluations: usize,
}

fn compare(a: &Evaluation, b: &Evaluation) -> Ordering {
    a.cost
        .total_cost
        .total_cmp(&b.cost.total_cost)
        .then_with(|| a.cost.hardware_cost.total_cmp(&b.cost.hardware_cost))
}

fn evaluate_all(genomes: &[Genome], space: &Space, config: &OptimizerConfig, problem: &Problem) -> Result<Vec<Evaluation>> {
    // collect keeps index order, so aggregation is deterministic
    genomes
        .par_iter()
        .map(|g| evaluate(&space.decode(g, problem), config, problem))
        .collect()
}

fn tournament<'a>(pop: &'a [(Genome, Evaluation)], size: usize, rng: &mut ChaCha8Rng) -> &'a Genome {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let other = rng.random_range(0..pop.len());
        if compare(&pop[other].1, &pop[best].1) == Ordering::Less {
            best = other;
        }
    }
    &pop[best].0
}

fn crossover(a: &Genome, b: &Genome, rng: &mut ChaCha8Rng) -> Genome {
    let mut pick = |x: f64, y: f64| if rng.random_bool(0.5) { x } else { y };
    let mut child = *a;
    for i in 0..4 {
        child.ln_factors[i] = pick(a.ln_factors[i], b.ln_factors[i]);
    }
    child.ln_modes = pick(a.ln_modes, b.ln_modes);
    child.a = pick(a.a, b.a);
    child.ln_cutoff = pick(a.ln_cutoff, b.ln_cutoff);
    if rng.random_bool(0.5) {
        child.r_index = b.r_index;
    }
    child
}

fn mutate(g: &mut Genome, config: &OptimizerConfig, space: &Space, rng: &mut ChaCha8Rng) {
    let scale = config.mutation_scale;
    let rate = config.mutation_rate.clamp(0.0, 1.0);
    let gauss = |rng: &mut ChaCha8Rng, sd: f64| -> f64 { rng.sample::<f64, _>(StandardNormal) * sd };
    for x in &mut g.ln_factors {
        if rng.random_bool(rate) {
            *x += gauss(rng, scale);
        }
    }
    if rng.random_bool(rate) {
        // mode counts span decades: mutate ln n with a wider step
        g.ln_modes += gauss(rng, 5.0 * scale);
    }
    if rng.random_bool(rate) && space.repeaters.len() > 1 {
        g.r_index = if rng.random_bool(0.5) { g.r_index.saturating_sub(1) } else { g.r_index + 1 };
    }
    if rng.random_bool(rate) {
        g.a += gauss(rng, scale);
    }
    if rng.random_bool(rate) {
        g.ln_cutoff += gauss(rng, 5.0 * scale);
    }
    *g = space.clamp(*g);
}

/// Evolves a population over the configured number of generations. The best
/// member survives unchanged (elitism), so the best cost never increases.
pub fn genetic_search(config: &OptimizerConfig, problem: &Problem) -> Result<OptimizationResult> {
    let space = Space::new(config, problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let mut genomes = vec![space.cheapest()];
    while genomes.len() < config.population_size {
        genomes.push(space.random(&mut rng));
    }
    let evals = evaluate_all(&genomes, &space, config, problem)?;
    let mut evaluations = evals.len();
    let mut population: Vec<(Genome, Evaluation)> = genomes.into_iter().zip(evals).collect();
    population.sort_by(|a, b| compare(&a.1, &b.1));
    let mut history = vec![record(0, &population, config)];

    for generation in 1..=config.generations {
        let elites = config.elitism_count.min(population.len());
        let mut children = Vec::with_capacity(config.population_size - elites);
        while children.len() + elites < config.population_size {
            let p1 = tournament(&population, config.tournament_size, &mut rng);
            let mut child = if rng.random_bool(config.crossover_rate.clamp(0.0, 1.0)) {
                let p2 = tournament(&population, config.tournament_size, &mut rng);
                crossover(p1, p2, &mut rng)
            } else {
                *p1
            };
            mutate(&mut child, config, &space, &mut rng);
            children.push(child);
        }
        let evals = evaluate_all(&children, &space, config, problem)?;
        evaluations += evals.len();
        population.truncate(elites);
        population.extend(children.into_iter().zip(evals));
        // stable sort: elites win ties against newcomers
        population.sort_by(|a, b| compare(&a.1, &b.1));
        history.push(record(generation, &population, config));
        log::info!(
            "generation {generation}: best cost {:.6e} (rate {:.4} Hz)",
            population[0].1.cost.total_cost,
            population[0].1.achieved_rate
        );
    }
    Ok(OptimizationResult {
        best: population.swap_remove(0).1,
        history,
        evaluations,
    })
}

fn record(generation: usize, sorted: &[(Genome, Evaluation)], config: &OptimizerConfig) -> GenerationRecord {
    let best = &sorted[0].1;
    GenerationRecord {
        generation,
        best_cost: best.cost.total_cost,
        best_hardware_cost: best.cost.hardware_cost,
        best_rate: best.achieved_rate,
        feasible: sorted.iter().filter(|(_, e)| e.achieved_rate >= config.target_rate).count(),
    }
}
