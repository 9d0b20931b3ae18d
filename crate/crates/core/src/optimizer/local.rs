use super::{evaluate, Candidate, Evaluation, OptimizerConfig, Problem, Result};
use crate::fibergrid::rank_for_selector;
use crate::hardware::{improvement_factor, value_for_factor, Parameter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Move {
    Factor(Parameter),
    Modes,
    Selector,
    Cutoff,
}

const MOVES: [Move; 7] = [
    Move::Factor(Parameter::CoherenceTime),
    Move::Modes,
    Move::Factor(Parameter::LinkFidelity),
    Move::Factor(Parameter::DetectionProb),
    Move::Factor(Parameter::SwapQuality),
    Move::Selector,
    Move::Cutoff,
];

#[derive(Debug, Clone, PartialEq)]
pub struct LocalSearchResult {
    pub best: Evaluation,
    pub start_cost: f64,
    pub evaluations: usize,
    pub accepted_steps: usize,
}

/// Neighbour of `c` one step along `mv`; `None` at a bound.
fn step(c: &Candidate, mv: Move, up: bool, config: &OptimizerConfig, problem: &Problem) -> Option<Candidate> {
    let mut next = *c;
    match mv {
        Move::Factor(p) => {
            let k = improvement_factor(p, c.params.value(p), &problem.context).ok()?;
            let (lo, hi) = config.bounds.factor;
            let k_new = if up { k * config.local_step } else { k / config.local_step }.clamp(lo, hi);
            if (k_new - k).abs() <= 1e-12 * k {
                return None;
            }
            let v = value_for_factor(p, k_new, &problem.context);
            next.params = c.params.with_value(p, v);
        }
        Move::Modes => {
            let n = c.params.num_modes;
            let delta = (n / 10).max(1);
            let limit = problem.modes_limit(&config.bounds);
            let m = if up { n.saturating_add(delta).min(limit) } else { n.saturating_sub(delta).max(1) };
            if m == n {
                return None;
            }
            next.params.num_modes = m;
        }
        Move::Selector => {
            let m = if c.r == 0 { 1 } else { problem.table.count(c.r) };
            if m <= 1 {
                return None;
            }
            let rank = rank_for_selector(c.a, m);
            let rank = if up { (rank + 1).min(m - 1) } else { rank.checked_sub(1)? };
            if rank == rank_for_selector(c.a, m) {
                return None;
            }
            next.a = rank as f64 / (m - 1) as f64;
        }
        Move::Cutoff => {
            let f = c.cutoff_fraction?;
            let (lo, hi) = config.bounds.cutoff_fraction;
            let g = if up { f * config.local_step } else { f / config.local_step }.clamp(lo, hi);
            if (g - f).abs() <= 1e-12 * f {
                return None;
            }
            next.cutoff_fraction = Some(g);
        }
    }
    (next != *c).then_some(next)
}

/// Coordinate descent from `start`: per parameter, steps down then up and keeps
/// stepping in a direction while the cost strictly decreases. Stops after a full
/// cycle without improvement or when `local_budget` evaluations are spent.
pub fn local_search(start: &Candidate, config: &OptimizerConfig, problem: &Problem) -> Result<LocalSearchResult> {
    config.validate()?;
    let mut best = evaluate(start, config, problem)?;
    let start_cost = best.cost.total_cost;
    let mut evaluations = 0;
    let mut accepted_steps = 0;
    'cycles: loop {
        let mut improved = false;
        for mv in MOVES {
            for up in [false, true] {
                loop {
                    if evaluations >= config.local_budget {
                        break 'cycles;
                    }
                    let Some(next) = step(&best.candidate, mv, up, config, problem) else {
                        break;
                    };
                    let eval = evaluate(&next, config, problem)?;
                    evaluations += 1;
                    if eval.cost.total_cost < best.cost.total_cost {
                        best = eval;
                        accepted_steps += 1;
                        improved = true;
                    } else {
                        break;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(LocalSearchResult { best, start_cost, evaluations, accepted_steps })
}

#[cfg(test)]
mod tests {
    use super::super::tests::{toy_config, toy_problem};
    use super::*;
    use crate::hardware::HardwareParams;

    fn with_fidelity(f: f64) -> Candidate {
        Candidate {
            params: HardwareParams { link_fidelity: f, ..HardwareParams::baseline() },
            ..Candidate::baseline(0)
        }
    }

    #[test]
    fn zero_budget_returns_start() {
        let config = OptimizerConfig { local_budget: 0, ..toy_config(1.0) };
        let start = with_fidelity(0.9);
        let res = local_search(&start, &config, &toy_problem()).unwrap();
        assert_eq!(res.best.candidate, start);
        assert_eq!(res.evaluations, 0);
    }

    #[test]
    fn improves_an_overbuilt_start() {
        let config = toy_config(1.0);
        let problem = toy_problem();
        let start = with_fidelity(0.9);
        let res = local_search(&start, &config, &problem).unwrap();
        assert!(res.best.cost.total_cost < res.start_cost);
        assert_eq!(res.best.cost.penalty, 0.0);
        assert!(res.best.candidate.params.link_fidelity < 0.9);
    }

    #[test]
    fn minimal_start_is_kept() {
        // target 0: every factor already at its lower bound
        let config = toy_config(0.0);
        let start = Candidate::baseline(0);
        let res = local_search(&start, &config, &toy_problem()).unwrap();
        assert_eq!(res.best.candidate, start);
        assert_eq!(res.accepted_steps, 0);
    }
}
