//! Application metrics computed from delivered pairs: the asymptotic BB84
//! secret-key rate and the success rate of two-qubit blind-computation test rounds.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::{count, lit, Scalar};
use crate::sim::PairRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("need at least {needed} records, got {found}")]
    TooFewRecords { needed: usize, found: usize },
    #[error("records span zero total time")]
    ZeroDuration,
    #[error("unknown metric {0:?} (expected skr or bqc)")]
    UnknownMetric(String),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Metric {
    #[default]
    Skr,
    Bqc,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Skr => "skr",
            Metric::Bqc => "bqc",
        })
    }
}

impl FromStr for Metric {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "skr" => Ok(Metric::Skr),
            "bqc" => Ok(Metric::Bqc),
            other => Err(MetricsError::UnknownMetric(other.to_string())),
        }
    }
}

/// `H(p) = −p log₂ p − (1 − p) log₂(1 − p)`, zero at both ends.
pub fn binary_entropy<T: Scalar>(p: T) -> T {
    let term = |x: T| if x > T::zero() { -x * x.log2() } else { T::zero() };
    term(p) + term(T::one() - p)
}

/// Root of `1 − 2H(Q) = 0` on `(0, ½)`, bisected to below `10⁻⁶`.
pub fn qber_threshold<T: Scalar>() -> T {
    let half = lit::<T>(0.5);
    let (mut lo, mut hi) = (lit::<T>(1e-9), half - lit(1e-9));
    for _ in 0..64 {
        let mid = (lo + hi) * half;
        if T::one() - lit::<T>(2.0) * binary_entropy(mid) > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < lit(1e-9) {
            break;
        }
    }
    (lo + hi) * half
}

/// QBER of a Werner pair, identical in every basis.
pub fn werner_qber<T: Scalar>(werner: T) -> T {
    (T::one() - werner) / lit(2.0)
}

fn mean_and_stderr<T: Scalar>(values: impl ExactSizeIterator<Item = T> + Clone) -> (T, T) {
    let n = values.len();
    let mean = values.clone().fold(T::zero(), |a, b| a + b) / count(n);
    if n < 2 {
        return (mean, T::zero());
    }
    let ss = values.fold(T::zero(), |a, v| a + (v - mean) * (v - mean));
    let var = ss / count(n - 1);
    (mean, (var / count(n)).sqrt())
}

/// Rate `count / Σ durations` and its delta-method standard error.
fn rate_from_durations<T: Scalar>(durations: impl ExactSizeIterator<Item = T> + Clone) -> Result<(T, T)> {
    let (mean, se) = mean_and_stderr(durations);
    if !(mean > T::zero()) {
        return Err(MetricsError::ZeroDuration);
    }
    Ok((T::one() / mean, se / (mean * mean)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkrResult<T> {
    pub entanglement_rate: T,
    pub qber: T,
    pub skr: T,
    pub rate_stderr: T,
    pub qber_stderr: T,
    pub num_records: usize,
}

impl<T: Scalar> SkrResult<T> {
    /// Delta-method standard error of `skr`; zero once the key fraction is clipped.
    pub fn skr_stderr(&self) -> T {
        if self.skr == T::zero() {
            return T::zero();
        }
        let two = lit::<T>(2.0);
        let fraction = T::one() - two * binary_entropy(self.qber);
        let slope = if self.qber > T::zero() {
            -two * ((T::one() - self.qber) / self.qber).log2()
        } else {
            T::zero()
        };
        let a = fraction * self.rate_stderr;
        let b = self.entanglement_rate * slope * self.qber_stderr;
        (a * a + b * b).sqrt()
    }
}

/// BB84 key rate from a record stream. A single record yields zero standard errors.
pub fn skr_from_records<T: Scalar>(records: &[PairRecord<T>]) -> Result<SkrResult<T>> {
    if records.is_empty() {
        return Err(MetricsError::TooFewRecords { needed: 1, found: 0 });
    }
    let (entanglement_rate, rate_stderr) = rate_from_durations(records.iter().map(|r| r.generation_duration))?;
    let (qber, qber_stderr) = mean_and_stderr(records.iter().map(|r| werner_qber(r.werner)));
    Ok(SkrResult {
        entanglement_rate,
        qber,
        skr: skr_formula(entanglement_rate, qber),
        rate_stderr,
        qber_stderr,
        num_records: records.len(),
    })
}

/// `R · max(0, 1 − 2H(Q))`, exactly zero from the threshold on.
pub fn skr_formula<T: Scalar>(rate: T, qber: T) -> T {
    if qber >= qber_threshold() {
        return T::zero();
    }
    rate * (T::one() - lit::<T>(2.0) * binary_entropy(qber)).max(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BqcResult<T> {
    pub round_rate: T,
    pub mean_success_prob: T,
    pub success_rate: T,
    pub round_rate_stderr: T,
    pub success_prob_stderr: T,
    pub num_rounds: usize,
}

impl<T: Scalar> BqcResult<T> {
    pub fn success_rate_stderr(&self) -> T {
        let a = self.mean_success_prob * self.round_rate_stderr;
        let b = self.round_rate * self.success_prob_stderr;
        (a * a + b * b).sqrt()
    }
}

/// Success probability of one test round. The first pair is stored for `delta_t`;
/// the result is averaged over which pair carries the dummy and which the trap.
pub fn bqc_round_success_prob<T: Scalar>(w_first: T, w_second: T, delta_t: T, coherence_time: T) -> T {
    let half = lit::<T>(0.5);
    let fid = |w: T| (T::one() + w) * half;
    let keep = (-delta_t / coherence_time).exp();
    let failure = |dummy: T, trap: T| {
        keep * (dummy * (T::one() - trap) + trap * (T::one() - dummy)) + half * (T::one() - keep)
    };
    let (f1, f2) = (fid(w_first), fid(w_second));
    T::one() - (failure(f1, f2) + failure(f2, f1)) * half
}

/// Groups records into disjoint consecutive rounds; a trailing odd record is dropped.
pub fn bqc_from_records<T: Scalar>(records: &[PairRecord<T>], coherence_time: T) -> Result<BqcResult<T>> {
    if records.len() < 2 {
        return Err(MetricsError::TooFewRecords { needed: 2, found: records.len() });
    }
    let rounds = records.chunks_exact(2);
    let (round_rate, round_rate_stderr) =
        rate_from_durations(rounds.clone().map(|r| r[0].generation_duration + r[1].generation_duration))?;
    let (mean_success_prob, success_prob_stderr) = mean_and_stderr(
        rounds
            .clone()
            .map(|r| bqc_round_success_prob(r[0].werner, r[1].werner, r[1].generation_duration, coherence_time)),
    );
    Ok(BqcResult {
        round_rate,
        mean_success_prob,
        success_rate: round_rate * mean_success_prob,
        round_rate_stderr,
        success_prob_stderr,
        num_rounds: rounds.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricResult<T> {
    Skr(SkrResult<T>),
    Bqc(BqcResult<T>),
}

impl<T: Scalar> MetricResult<T> {
    /// The rate the optimizer compares against its target.
    pub fn value(&self) -> T {
        match self {
            MetricResult::Skr(r) => r.skr,
            MetricResult::Bqc(r) => r.success_rate,
        }
    }

    pub fn stderr(&self) -> T {
        match self {
            MetricResult::Skr(r) => r.skr_stderr(),
            MetricResult::Bqc(r) => r.success_rate_stderr(),
        }
    }

    /// One-sided lower confidence bound `value − z · stderr`.
    pub fn lower_bound(&self, z: T) -> T {
        self.value() - z * self.stderr()
    }

    /// `(key, value)` pairs for key-value text output.
    pub fn fields(&self) -> Vec<(&'static str, String)> {
        match self {
            MetricResult::Skr(r) => vec![
                ("metric", "skr".into()),
                ("entanglement_rate_hz", r.entanglement_rate.to_string()),
                ("entanglement_rate_stderr_hz", r.rate_stderr.to_string()),
                ("qber", r.qber.to_string()),
                ("qber_stderr", r.qber_stderr.to_string()),
                ("skr_hz", r.skr.to_string()),
                ("skr_stderr_hz", r.skr_stderr().to_string()),
                ("records", r.num_records.to_string()),
            ],
            MetricResult::Bqc(r) => vec![
                ("metric", "bqc".into()),
                ("round_rate_hz", r.round_rate.to_string()),
                ("round_rate_stderr_hz", r.round_rate_stderr.to_string()),
                ("mean_success_prob", r.mean_success_prob.to_string()),
                ("success_prob_stderr", r.success_prob_stderr.to_string()),
                ("success_rate_hz", r.success_rate.to_string()),
                ("success_rate_stderr_hz", r.success_rate_stderr().to_string()),
                ("rounds", r.num_rounds.to_string()),
            ],
        }
    }
}

pub fn compute_metric<T: Scalar>(metric: Metric, records: &[PairRecord<T>], coherence_time: T) -> Result<MetricResult<T>> {
    Ok(match metric {
        Metric::Skr => MetricResult::Skr(skr_from_records(records)?),
        Metric::Bqc => MetricResult::Bqc(bqc_from_records(records, coherence_time)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(werner: f64, period: f64, n: usize) -> Vec<PairRecord<f64>> {
        (1..=n)
            .map(|i| PairRecord { werner, delivery_time: period * i as f64, generation_duration: period })
            .collect()
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5f64), 1.0);
        assert_eq!(binary_entropy(0.0f64), 0.0);
        assert_eq!(binary_entropy(1.0f64), 0.0);
        assert!((binary_entropy(0.11f64) - 0.499_915_958_164_528).abs() < 1e-12);
        assert!((binary_entropy(0.05f64) - 0.286_396_957_115_956_25).abs() < 1e-12);
    }

    #[test]
    fn threshold() {
        let q: f64 = qber_threshold();
        assert!((q - 0.110_027_86).abs() < 1e-6);
        assert!(1.0 - 2.0 * binary_entropy(q - 0.01) > 0.0);
        assert!(1.0 - 2.0 * binary_entropy(q + 0.01) < 0.0);
        let q32: f32 = qber_threshold();
        assert!((q32 - 0.110_03).abs() < 1e-4);
    }

    #[test]
    fn skr_examples() {
        let r = skr_from_records(&records(1.0, 1.0 / 80.0, 50)).unwrap();
        assert!((r.skr - 80.0).abs() < 1e-9);
        assert_eq!(r.qber, 0.0);
        let r = skr_from_records(&records(0.9, 0.1, 20)).unwrap();
        assert!((r.qber - 0.05).abs() < 1e-15);
        assert!((r.skr - 4.272_060_857_680_875).abs() < 1e-9);
        let w_star = 1.0 - 2.0 * qber_threshold::<f64>();
        assert_eq!(skr_from_records(&records(w_star, 0.1, 5)).unwrap().skr, 0.0);
        assert_eq!(skr_from_records(&records(0.5, 0.1, 5)).unwrap().skr, 0.0);
        assert!(skr_from_records::<f64>(&[]).is_err());
    }

    #[test]
    fn bqc_success_examples() {
        assert_eq!(bqc_round_success_prob(1.0, 1.0, 0.0, 1.0f64), 1.0);
        assert!((bqc_round_success_prob(0.3, 0.7, 1e6, 1.0f64) - 0.5).abs() < 1e-12);
        assert!((bqc_round_success_prob(0.9, 0.9, 0.0, 1.0f64) - 0.905).abs() < 1e-12);
        assert!((bqc_round_success_prob(0.0, 0.0, 0.0, 1.0f64) - 0.5).abs() < 1e-12);
        assert!((bqc_round_success_prob(1.0, 1.0, 0.1, 1.0f64) - 0.952_418_709_017_979_8).abs() < 1e-12);
    }

    #[test]
    fn bqc_rounds() {
        let r = bqc_from_records(&records(1.0, 0.1, 11), 1.0).unwrap();
        assert_eq!(r.num_rounds, 5);
        assert!((r.round_rate - 5.0).abs() < 1e-9);
        assert!((r.mean_success_prob - (1.0 - 0.5 * (1.0 - (-0.1f64).exp()))).abs() < 1e-12);
        assert!((r.success_rate - r.round_rate * r.mean_success_prob).abs() < 1e-12);
        let perfect = bqc_from_records(&records(1.0, 1.0 / 80.0, 10), f64::INFINITY).unwrap();
        assert!((perfect.round_rate - 40.0).abs() < 1e-9);
        assert_eq!(perfect.success_rate, perfect.round_rate);
        assert!(bqc_from_records(&records(1.0, 0.1, 1), 1.0).is_err());
    }

    #[test]
    fn metric_parsing() {
        assert_eq!("SKR".parse::<Metric>().unwrap(), Metric::Skr);
        assert_eq!("bqc".parse::<Metric>().unwrap(), Metric::Bqc);
        assert!("qkd".parse::<Metric>().is_err());
    }
}
