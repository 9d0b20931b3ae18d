//! Monte Carlo estimation of a metric over many independent chain runs.

use rayon::prelude::*;
use thiserror::Error;

use crate::metrics::{compute_metric, Metric, MetricResult, MetricsError};
use crate::scalar::Scalar;
use crate::sim::{derive_seed, run_chain_bounded, SimConfig, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("at least one run is required")]
    NoRuns,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings<T> {
    pub runs: usize,
    pub pairs_per_run: usize,
    pub base_seed: u64,
    /// Simulated-time budget per run; runs that exceed it count as partial.
    pub time_limit: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    /// `None` when too few pairs were delivered to evaluate the metric.
    pub result: Option<MetricResult<T>>,
    pub runs: usize,
    pub truncated_runs: usize,
    pub records: usize,
    /// Generation time covered by the records used.
    pub covered_time: T,
    /// Time spent in truncated runs after their last usable delivery.
    pub tail_time: T,
}

impl<T: Scalar> Estimate<T> {
    fn coverage(&self) -> T {
        let total = self.covered_time + self.tail_time;
        if total > T::zero() {
            self.covered_time / total
        } else {
            T::zero()
        }
    }

    /// Metric value with the rate discounted for time lost in truncated runs.
    pub fn value(&self) -> T {
        self.result.map_or(T::zero(), |r| r.value() * self.coverage())
    }

    pub fn stderr(&self) -> T {
        self.result.map_or(T::zero(), |r| r.stderr() * self.coverage())
    }

    pub fn lower_bound(&self, z: T) -> T {
        self.value() - z * self.stderr()
    }
}

/// Runs `settings.runs` simulations with seeds derived from `base_seed`, in
/// parallel, and pools their records in run order.
///
/// For BQC each run contributes an even number of records so that rounds never
/// straddle two runs.
pub fn estimate_metric<T: Scalar>(
    template: &SimConfig<T>,
    metric: Metric,
    settings: &McSettings<T>,
) -> Result<Estimate<T>, EstimateError> {
    if settings.runs == 0 {
        return Err(EstimateError::NoRuns);
    }
    template.validate()?;
    let outcomes = (0..settings.runs)
        .into_par_iter()
        .map(|i| {
            let mut cfg = template.clone();
            cfg.num_pairs = settings.pairs_per_run;
            cfg.rng_seed = derive_seed(settings.base_seed, i as u64);
            run_chain_bounded(&cfg, settings.time_limit)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::new();
    let mut truncated_runs = 0;
    let mut covered_time = T::zero();
    let mut tail_time = T::zero();
    for out in outcomes {
        let mut used = out.records.len();
        if metric == Metric::Bqc {
            used -= used % 2;
        }
        let used_recs = &out.records[..used];
        covered_time = used_recs.iter().fold(covered_time, |acc, r| acc + r.generation_duration);
        if out.truncated {
            truncated_runs += 1;
            let last = used_recs.last().map_or(T::zero(), |r| r.delivery_time);
            tail_time = tail_time + (out.elapsed - last);
        }
        records.extend_from_slice(used_recs);
    }
    let result = match compute_metric(metric, &records, template.params.coherence_time) {
        Ok(r) => Some(r),
        Err(MetricsError::TooFewRecords { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Estimate {
        result,
        runs: settings.runs,
        truncated_runs,
        records: records.len(),
        covered_time,
        tail_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibergrid::{ChainConfiguration, ElementaryLink};
    use crate::hardware::HardwareParams;

    fn template(p_det: f64) -> SimConfig<f64> {
        let chain = ChainConfiguration::from_links(vec![ElementaryLink::new(200.0, 0.0)]).unwrap();
        let params = HardwareParams { detection_prob: p_det, ..HardwareParams::noiseless(1) };
        SimConfig::new(chain, params, 1, 0)
    }

    #[test]
    fn deterministic_link_rate() {
        let settings = McSettings { runs: 8, pairs_per_run: 4, base_seed: 1, time_limit: f64::INFINITY };
        let est = estimate_metric(&template(1.0), Metric::Skr, &settings).unwrap();
        assert!((est.value() - 1000.0).abs() < 1e-6);
        assert_eq!(est.records, 32);
        let bqc = estimate_metric(&template(1.0), Metric::Bqc, &settings).unwrap();
        assert!((bqc.value() - 500.0).abs() < 1e-6);
    }

    #[test]
    fn reproducible_and_truncation_discounts() {
        let settings = McSettings { runs: 16, pairs_per_run: 10, base_seed: 9, time_limit: f64::INFINITY };
        let a = estimate_metric(&template(0.2), Metric::Skr, &settings).unwrap();
        let b = estimate_metric(&template(0.2), Metric::Skr, &settings).unwrap();
        assert_eq!(a, b);
        let short = McSettings { time_limit: 0.02, ..settings };
        let c = estimate_metric(&template(0.2), Metric::Skr, &short).unwrap();
        assert!(c.truncated_runs > 0);
        assert!(c.value() <= c.result.unwrap().value());
        let none = McSettings { time_limit: 1e-4, ..settings };
        assert_eq!(estimate_metric(&template(0.2), Metric::Skr, &none).unwrap().value(), 0.0);
    }
}
