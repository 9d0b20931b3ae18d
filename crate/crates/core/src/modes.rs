//! Smallest number of multiplexing modes that reaches a rate target when
//! fiber loss is the only imperfection.

use thiserror::Error;

use crate::estimate::{estimate_metric, EstimateError, McSettings};
use crate::fibergrid::{ChainConfiguration, ElementaryLink, PathError};
use crate::hardware::HardwareParams;
use crate::metrics::Metric;
use crate::scalar::{count, lit, Scalar};
use crate::sim::SimConfig;

/// One-sided 95% normal quantile.
pub const Z_95: f64 = 1.645;
pub const DEFAULT_MODES_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModesError {
    #[error("target rate {target} Hz is not reached with {cap} modes")]
    Unreachable { target: f64, cap: u64 },
    #[error("target rate must be positive, got {0}")]
    InvalidTarget(f64),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinModesSettings<T> {
    pub target_rate: T,
    pub metric: Metric,
    pub runs: usize,
    pub pairs_per_run: usize,
    pub seed: u64,
    /// Required margin: the rate's lower bound `value − z·stderr` must reach the target.
    pub z: T,
    pub modes_cap: u64,
}

impl<T: Scalar> MinModesSettings<T> {
    pub fn new(target_rate: T, metric: Metric) -> Self {
        Self {
            target_rate,
            metric,
            runs: 100,
            pairs_per_run: 2,
            seed: 0,
            z: lit(Z_95),
            modes_cap: DEFAULT_MODES_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinModesResult<T> {
    pub modes: u64,
    pub rate: T,
    pub rate_lower_bound: T,
    /// Number of mode counts that were simulated.
    pub probes: usize,
}

/// Equal links splitting the totals among `num_repeaters + 1` spans.
pub fn symmetrized_chain<T: Scalar>(
    total_length: T,
    total_attenuation: T,
    num_repeaters: usize,
) -> Result<ChainConfiguration<T>, PathError> {
    let links = count::<T>(num_repeaters + 1);
    let link = ElementaryLink::new(total_length / links, total_attenuation / links);
    ChainConfiguration::from_links(vec![link; num_repeaters + 1])
}

/// Exponential then binary search over `n` on a noiseless symmetrized chain.
/// Every probe uses the same seeds, so neighbouring mode counts share randomness.
pub fn minimal_modes<T: Scalar>(
    total_length: T,
    total_attenuation: T,
    num_repeaters: usize,
    settings: &MinModesSettings<T>,
) -> Result<MinModesResult<T>, ModesError> {
    let target = settings.target_rate;
    if !(target > T::zero()) || !target.is_finite() {
        return Err(ModesError::InvalidTarget(crate::scalar::to_f64(target)));
    }
    let chain = symmetrized_chain(total_length, total_attenuation, num_repeaters)?;
    let mc = McSettings {
        runs: settings.runs,
        pairs_per_run: settings.pairs_per_run,
        base_seed: settings.seed,
        // a run this slow is far below target
        time_limit: count::<T>(settings.pairs_per_run) / target * lit(100.0),
    };
    let mut probes = 0;
    let mut probe = |modes: u64| -> Result<(bool, T, T), ModesError> {
        probes += 1;
        let cfg = SimConfig::new(chain.clone(), HardwareParams::noiseless(modes), settings.pairs_per_run, 0);
        let est = estimate_metric(&cfg, settings.metric, &mc)?;
        let lb = est.lower_bound(settings.z);
        log::debug!("n = {modes}: rate {} (lower bound {lb})", est.value());
        Ok((lb >= target, est.value(), lb))
    };

    let mut low = 0u64; // largest count known to fail
    let mut high = 1u64;
    let mut best = loop {
        let (ok, rate, lb) = probe(high)?;
        if ok {
            break (high, rate, lb);
        }
        if high >= settings.modes_cap {
            return Err(ModesError::Unreachable { target: crate::scalar::to_f64(target), cap: settings.modes_cap });
        }
        low = high;
        high = (high * 2).min(settings.modes_cap);
    };
    while best.0 - low > 1 {
        let mid = low + (best.0 - low) / 2;
        let (ok, rate, lb) = probe(mid)?;
        if ok {
            best = (mid, rate, lb);
        } else {
            low = mid;
        }
    }
    Ok(MinModesResult {
        modes: best.0,
        rate: best.1,
        rate_lower_bound: best.2,
        probes,
    })
}
