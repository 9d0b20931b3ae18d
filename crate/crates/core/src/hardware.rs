//! Hardware parameters, the state-of-the-art baseline, no-imperfection
//! probabilities and the improvement-factor cost.
//!
//! Every parameter is mapped onto a common scale, its *no-imperfection
//! probability* `p`. A parameter is improved by a factor `k` when its
//! no-imperfection probability becomes `p_baseline^(1/k)`, so the factor of a
//! candidate value is `ln(p_baseline) / ln(p_candidate)`. The hardware cost of
//! a parameter set is the sum of its five factors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::{lit, to_f64, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardwareError {
    #[error("unknown hardware parameter `{0}`")]
    UnknownParameter(String),
    #[error("{parameter} = {value} is outside its domain")]
    OutOfDomain { parameter: Parameter, value: f64 },
    #[error("{0} has no-imperfection probability 1: improvement factor is infinite")]
    InfiniteImprovement(Parameter),
    #[error("{0} has no-imperfection probability <= 0")]
    ZeroProbability(Parameter),
    #[error("{operation} converts to survival probability {value}, outside (0, 1]")]
    Survival { operation: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, HardwareError>;

/// The five optimized hardware quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parameter {
    CoherenceTime,
    NumModes,
    LinkFidelity,
    DetectionProb,
    SwapQuality,
}

impl Parameter {
    pub const ALL: [Parameter; 5] = [
        Parameter::CoherenceTime,
        Parameter::NumModes,
        Parameter::LinkFidelity,
        Parameter::DetectionProb,
        Parameter::SwapQuality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::CoherenceTime => "coherence_time",
            Parameter::NumModes => "num_modes",
            Parameter::LinkFidelity => "link_fidelity",
            Parameter::DetectionProb => "detection_prob",
            Parameter::SwapQuality => "swap_quality",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Parameter {
    type Err = HardwareError;

    fn from_str(s: &str) -> Result<Self> {
        Parameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| HardwareError::UnknownParameter(s.to_owned()))
    }
}

/// Hardware quantities of a (homogeneous) repeater chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardwareParams<T> {
    /// Memory coherence time in seconds.
    pub coherence_time: T,
    /// Number of multiplexing modes per elementary link.
    pub num_modes: u64,
    /// Fidelity of freshly generated elementary links.
    pub link_fidelity: T,
    /// Photon detection probability, fiber loss excluded.
    pub detection_prob: T,
    /// Depolarizing parameter of the entanglement swap.
    pub swap_quality: T,
}

/// State-of-the-art color-center values.
pub const BASELINE: HardwareParams<f64> = HardwareParams {
    coherence_time: 1.0,
    num_modes: 1,
    link_fidelity: 0.83,
    detection_prob: 0.255,
    swap_quality: 0.83,
};

impl<T: Scalar> HardwareParams<T> {
    pub fn new(
        coherence_time: T,
        num_modes: u64,
        link_fidelity: T,
        detection_prob: T,
        swap_quality: T,
    ) -> Result<Self> {
        let params = Self {
            coherence_time,
            num_modes,
            link_fidelity,
            detection_prob,
            swap_quality,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn baseline() -> Self {
        Self {
            coherence_time: lit(BASELINE.coherence_time),
            num_modes: BASELINE.num_modes,
            link_fidelity: lit(BASELINE.link_fidelity),
            detection_prob: lit(BASELINE.detection_prob),
            swap_quality: lit(BASELINE.swap_quality),
        }
    }

    /// Only fiber attenuation remains: perfect links, swaps, detection and memories.
    pub fn noiseless(num_modes: u64) -> Self {
        Self {
            coherence_time: T::infinity(),
            num_modes,
            link_fidelity: T::one(),
            detection_prob: T::one(),
            swap_quality: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in Parameter::ALL {
            check_domain(p, self.value(p))?;
        }
        Ok(())
    }

    pub fn value(&self, parameter: Parameter) -> T {
        match parameter {
            Parameter::CoherenceTime => self.coherence_time,
            Parameter::NumModes => T::from_u64(self.num_modes).unwrap_or_else(T::infinity),
            Parameter::LinkFidelity => self.link_fidelity,
            Parameter::DetectionProb => self.detection_prob,
            Parameter::SwapQuality => self.swap_quality,
        }
    }

    /// Returns a copy with one parameter replaced. Mode counts are rounded up.
    pub fn with_value(mut self, parameter: Parameter, value: T) -> Self {
        match parameter {
            Parameter::CoherenceTime => self.coherence_time = value,
            Parameter::NumModes => {
                self.num_modes = value.ceil().to_u64().unwrap_or(u64::MAX).max(1)
            }
            Parameter::LinkFidelity => self.link_fidelity = value,
            Parameter::DetectionProb => self.detection_prob = value,
            Parameter::SwapQuality => self.swap_quality = value,
        }
        self
    }

    /// Werner parameter of a fresh elementary link, `W = (4F - 1) / 3`.
    pub fn link_werner(&self) -> T {
        fidelity_to_werner(self.link_fidelity)
    }
}

pub fn fidelity_to_werner<T: Scalar>(fidelity: T) -> T {
    (lit::<T>(4.0) * fidelity - T::one()) / lit(3.0)
}

pub fn werner_to_fidelity<T: Scalar>(werner: T) -> T {
    (T::one() + lit::<T>(3.0) * werner) / lit(4.0)
}

fn check_domain<T: Scalar>(parameter: Parameter, value: T) -> Result<()> {
    let ok = match parameter {
        Parameter::CoherenceTime => value > T::zero(),
        Parameter::NumModes => value >= T::one() && value.fract() == T::zero(),
        Parameter::LinkFidelity => value > lit(0.25) && value <= T::one(),
        Parameter::DetectionProb | Parameter::SwapQuality => {
            value > T::zero() && value <= T::one()
        }
    };
    if ok {
        Ok(())
    } else {
        Err(HardwareError::OutOfDomain {
            parameter,
            value: to_f64(value),
        })
    }
}

/// Path-dependent input to the cost model: the single-photon survival
/// probability over an elementary link of two average fiber segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathContext<T> {
    pub p_surv_baseline: T,
}

impl<T: Scalar> PathContext<T> {
    pub fn new(p_surv_baseline: T) -> Self {
        Self { p_surv_baseline }
    }
}

/// Probability that `parameter` at `value` introduces no error or loss.
pub fn no_imperfection_prob<T: Scalar>(
    parameter: Parameter,
    value: T,
    ctx: &PathContext<T>,
) -> Result<T> {
    check_domain(parameter, value)?;
    Ok(match parameter {
        Parameter::CoherenceTime => (-value.recip()).exp(),
        Parameter::NumModes => {
            T::one() - (T::one() - ctx.p_surv_baseline).powf(value)
        }
        Parameter::LinkFidelity | Parameter::DetectionProb | Parameter::SwapQuality => value,
    })
}

/// `ln` of the no-imperfection probability, evaluated without the round
/// trip through `exp` where a closed form exists.
fn ln_no_imperfection<T: Scalar>(parameter: Parameter, value: T, ctx: &PathContext<T>) -> Result<T> {
    check_domain(parameter, value)?;
    match parameter {
        Parameter::CoherenceTime => Ok(-value.recip()),
        Parameter::NumModes => {
            // 1 - (1 - p)^N computed as -expm1(N ln(1 - p))
            let p = -(value * (-ctx.p_surv_baseline).ln_1p()).exp_m1();
            Ok(p.ln())
        }
        _ => Ok(value.ln()),
    }
}

/// Improvement factor `k = ln(p_baseline) / ln(p_candidate)` of one parameter.
pub fn improvement_factor<T: Scalar>(
    parameter: Parameter,
    value: T,
    ctx: &PathContext<T>,
) -> Result<T> {
    let baseline = HardwareParams::<T>::baseline().value(parameter);
    let ln_base = ln_no_imperfection(parameter, baseline, ctx)?;
    let ln_cand = ln_no_imperfection(parameter, value, ctx)?;
    if ln_cand == T::zero() {
        return Err(HardwareError::InfiniteImprovement(parameter));
    }
    if !ln_cand.is_finite() || !ln_base.is_finite() || ln_base == T::zero() {
        return Err(HardwareError::ZeroProbability(parameter));
    }
    Ok(ln_base / ln_cand)
}

/// No-imperfection probability `p` improved by a factor `k`: `p^(1/k)`.
pub fn improve_probability<T: Scalar>(p: T, factor: T) -> T {
    p.powf(factor.recip())
}

/// Inverse of [`improvement_factor`]: the parameter value whose
/// no-imperfection probability is `p_baseline^(1/factor)`. The mode count is
/// returned as a real number; callers round it up.
pub fn value_for_factor<T: Scalar>(parameter: Parameter, factor: T, ctx: &PathContext<T>) -> T {
    let baseline = HardwareParams::<T>::baseline().value(parameter);
    match parameter {
        Parameter::CoherenceTime => baseline * factor,
        Parameter::NumModes => {
            let ln_base = ln_no_imperfection(parameter, baseline, ctx)
                .expect("baseline mode count is in domain");
            // target p = exp(ln_base / k); N = ln(1 - p) / ln(1 - p_surv)
            let one_minus_p = -(ln_base / factor).exp_m1();
            one_minus_p.ln() / (-ctx.p_surv_baseline).ln_1p()
        }
        _ => improve_probability(baseline, factor),
    }
}

/// Improvement factors, their sum, and the rate-target penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown<T> {
    pub improvement_factors: BTreeMap<Parameter, T>,
    pub hardware_cost: T,
    pub penalty: T,
    pub total_cost: T,
}

impl<T: Scalar> CostBreakdown<T> {
    /// Sets the penalty term and recomputes `total = penalty + w2 * hardware_cost`.
    pub fn with_penalty(mut self, penalty: T, hardware_weight: T) -> Self {
        self.penalty = penalty;
        self.total_cost = penalty + hardware_weight * self.hardware_cost;
        self
    }

    pub fn factor(&self, parameter: Parameter) -> T {
        self.improvement_factors[&parameter]
    }
}

/// Improvement factors of all five parameters and their sum. The penalty is
/// left at zero.
pub fn hardware_cost<T: Scalar>(
    params: &HardwareParams<T>,
    ctx: &PathContext<T>,
) -> Result<CostBreakdown<T>> {
    let mut improvement_factors = BTreeMap::new();
    for p in Parameter::ALL {
        improvement_factors.insert(p, improvement_factor(p, params.value(p), ctx)?);
    }
    let hardware_cost = improvement_factors.values().fold(T::zero(), |acc, &k| acc + k);
    Ok(CostBreakdown {
        improvement_factors,
        hardware_cost,
        penalty: T::zero(),
        total_cost: hardware_cost,
    })
}

/// Component-level color-center figures the baseline is derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorCenterComponents<T> {
    pub carbon_coherence: T,
    pub elementary_link_fidelity: T,
    pub electron_init_fidelity: T,
    pub carbon_init_fidelity: T,
    pub electron_carbon_gate_fidelity: T,
    pub electron_1q_gate_fidelity: T,
    pub carbon_1q_gate_fidelity: T,
    pub electron_readout_fidelity_0: T,
    pub electron_readout_fidelity_1: T,
    pub photonic_interface_eff: T,
    pub freq_conversion_eff: T,
}

impl<T: Scalar> ColorCenterComponents<T> {
    /// Literature values for nitrogen-vacancy centers.
    pub fn state_of_the_art() -> Self {
        Self {
            carbon_coherence: lit(1.0),
            elementary_link_fidelity: lit(0.83),
            electron_init_fidelity: lit(0.995),
            carbon_init_fidelity: lit(0.99),
            electron_carbon_gate_fidelity: lit(0.97),
            electron_1q_gate_fidelity: lit(0.995),
            carbon_1q_gate_fidelity: lit(0.999),
            electron_readout_fidelity_0: lit(0.93),
            electron_readout_fidelity_1: lit(0.995),
            photonic_interface_eff: lit(0.855),
            freq_conversion_eff: lit(0.3),
        }
    }

    /// Readout fidelity averaged over both outcomes.
    pub fn mean_readout_fidelity(&self) -> T {
        (self.electron_readout_fidelity_0 + self.electron_readout_fidelity_1) / lit(2.0)
    }
}

fn unit_probability<T: Scalar>(operation: &'static str, value: T) -> Result<T> {
    if value > T::zero() && value <= T::one() {
        Ok(value)
    } else {
        Err(HardwareError::Survival {
            operation,
            value: to_f64(value),
        })
    }
}

/// Depolarizing survival probability of a single-qubit operation of fidelity `f`.
pub fn single_qubit_survival<T: Scalar>(f: T) -> T {
    lit::<T>(2.0) * f - T::one()
}

/// Depolarizing survival probability of a two-qubit operation of fidelity `f`.
pub fn two_qubit_survival<T: Scalar>(f: T) -> T {
    (lit::<T>(4.0) * f - T::one()) / lit(3.0)
}

/// `p_det = p_photon_interface * p_conversion`.
pub fn derive_baseline_detection_prob<T: Scalar>(c: &ColorCenterComponents<T>) -> Result<T> {
    let interface = unit_probability("photonic interface", c.photonic_interface_eff)?;
    let conversion = unit_probability("frequency conversion", c.freq_conversion_eff)?;
    Ok(interface * conversion)
}

/// Swap quality as the product of the survival probabilities of every
/// operation in the color-center swap circuit: two carbon and two electron
/// single-qubit gates, one electron-carbon gate, one electron
/// initialization, two electron readouts and the retrieve step.
pub fn derive_baseline_swap_quality<T: Scalar>(
    c: &ColorCenterComponents<T>,
    retrieve_survival: T,
) -> Result<T> {
    let carbon = unit_probability("carbon gate", single_qubit_survival(c.carbon_1q_gate_fidelity))?;
    let two_qubit = unit_probability(
        "electron-carbon gate",
        two_qubit_survival(c.electron_carbon_gate_fidelity),
    )?;
    let electron =
        unit_probability("electron gate", single_qubit_survival(c.electron_1q_gate_fidelity))?;
    let init = unit_probability(
        "electron initialization",
        single_qubit_survival(c.electron_init_fidelity),
    )?;
    let readout = unit_probability(
        "electron readout",
        single_qubit_survival(c.mean_readout_fidelity()),
    )?;
    let retrieve = unit_probability("retrieve", retrieve_survival)?;
    Ok(carbon.powi(2) * two_qubit * electron.powi(2) * init * readout.powi(2) * retrieve)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BB_PSURV: f64 = 2.979_323_396_081_235_4e-3;

    fn ctx() -> PathContext<f64> {
        PathContext::new(BB_PSURV)
    }

    #[test]
    fn no_imperfection_rows() {
        let c = ctx();
        assert_eq!(no_imperfection_prob(Parameter::DetectionProb, 0.1, &c).unwrap(), 0.1);
        let t = no_imperfection_prob(Parameter::CoherenceTime, 1.0, &c).unwrap();
        assert!((t - 0.367_879_441_171_442_3).abs() < 1e-15);
        let n = no_imperfection_prob(Parameter::NumModes, 1.0, &c).unwrap();
        assert!((n - BB_PSURV).abs() < 1e-15);
        assert_eq!(no_imperfection_prob(Parameter::SwapQuality, 0.9, &c).unwrap(), 0.9);
        assert_eq!(no_imperfection_prob(Parameter::LinkFidelity, 0.9, &c).unwrap(), 0.9);
    }

    #[test]
    fn unknown_and_out_of_domain() {
        assert!(matches!(
            "t2".parse::<Parameter>(),
            Err(HardwareError::UnknownParameter(_))
        ));
        assert_eq!("swap_quality".parse::<Parameter>().unwrap(), Parameter::SwapQuality);
        let c = ctx();
        assert!(no_imperfection_prob(Parameter::LinkFidelity, 0.25, &c).is_err());
        assert!(no_imperfection_prob(Parameter::DetectionProb, 1.2, &c).is_err());
        assert!(no_imperfection_prob(Parameter::NumModes, 2.5, &c).is_err());
        assert!(no_imperfection_prob(Parameter::CoherenceTime, 0.0, &c).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)] // 3.14 s, not π
    fn improvement_examples() {
        let c = ctx();
        let pdet = 0.255f64.powf(1.0 / 5.0);
        let k = improvement_factor(Parameter::DetectionProb, pdet, &c).unwrap();
        assert!((k - 5.0).abs() < 1e-12);
        // a no-imperfection probability of 0.1 improved by 5
        assert!((0.1f64.powf(1.0 / 5.0) - 0.63).abs() < 0.001);
        assert_eq!(improvement_factor(Parameter::SwapQuality, 0.83, &c).unwrap(), 1.0);
        let kt = improvement_factor(Parameter::CoherenceTime, 3.14, &c).unwrap();
        assert!((kt - 3.14).abs() < 1e-12);
    }

    #[test]
    fn infinite_improvement_is_error() {
        let c = ctx();
        assert_eq!(
            improvement_factor(Parameter::LinkFidelity, 1.0, &c),
            Err(HardwareError::InfiniteImprovement(Parameter::LinkFidelity))
        );
        assert!(improvement_factor(Parameter::CoherenceTime, f64::INFINITY, &c).is_err());
    }

    #[test]
    fn below_baseline_factor_is_a_credit() {
        let k = improvement_factor(Parameter::DetectionProb, 0.1, &ctx()).unwrap();
        assert!(k < 1.0 && k > 0.0);
    }

    #[test]
    fn hardware_cost_examples() {
        let c = ctx();
        let base = HardwareParams::<f64>::baseline();
        let cost = hardware_cost(&base, &c).unwrap();
        assert!((cost.hardware_cost - 5.0).abs() < 1e-12);
        assert_eq!(cost.penalty, 0.0);

        let t2 = HardwareParams { coherence_time: 2.0, ..base };
        assert!((hardware_cost(&t2, &c).unwrap().hardware_cost - 6.0).abs() < 1e-12);

        let p3 = HardwareParams { detection_prob: 0.255f64.powf(1.0 / 3.0), ..base };
        assert!((hardware_cost(&p3, &c).unwrap().hardware_cost - 7.0).abs() < 1e-12);
    }

    #[test]
    fn factor_inverse_roundtrip() {
        let c = ctx();
        for p in Parameter::ALL {
            for k in [0.5, 1.0, 2.0, 7.5] {
                let v = value_for_factor(p, k, &c);
                if p == Parameter::NumModes {
                    // exact real-valued inverse before rounding
                    let real = 1.0 - (1.0 - BB_PSURV).powf(v);
                    let back = BB_PSURV.ln() / real.ln();
                    assert!((back - k).abs() < 1e-9, "{p} {k} {back}");
                } else {
                    let back = improvement_factor(p, v, &c).unwrap();
                    assert!((back - k).abs() < 1e-9, "{p} {k} {back}");
                }
            }
        }
    }

    #[test]
    fn detection_prob_derivation() {
        let c = ColorCenterComponents::<f64>::state_of_the_art();
        assert!((derive_baseline_detection_prob(&c).unwrap() - 0.2565).abs() < 1e-15);
        let ones = ColorCenterComponents {
            photonic_interface_eff: 1.0,
            freq_conversion_eff: 1.0,
            ..c
        };
        assert_eq!(derive_baseline_detection_prob(&ones).unwrap(), 1.0);
        let halves = ColorCenterComponents {
            photonic_interface_eff: 0.5,
            freq_conversion_eff: 0.5,
            ..c
        };
        assert_eq!(derive_baseline_detection_prob(&halves).unwrap(), 0.25);
        let bad = ColorCenterComponents { freq_conversion_eff: 0.0, ..c };
        assert!(derive_baseline_detection_prob(&bad).is_err());
    }

    #[test]
    fn swap_quality_derivation() {
        let sota = ColorCenterComponents::<f64>::state_of_the_art();
        let perfect = ColorCenterComponents {
            electron_init_fidelity: 1.0,
            electron_carbon_gate_fidelity: 1.0,
            electron_1q_gate_fidelity: 1.0,
            carbon_1q_gate_fidelity: 1.0,
            electron_readout_fidelity_0: 1.0,
            electron_readout_fidelity_1: 1.0,
            ..sota
        };
        assert_eq!(derive_baseline_swap_quality(&perfect, 1.0).unwrap(), 1.0);

        // every operation survives with 0.99
        let uniform = ColorCenterComponents {
            electron_init_fidelity: 0.995,
            electron_carbon_gate_fidelity: 0.9925,
            electron_1q_gate_fidelity: 0.995,
            carbon_1q_gate_fidelity: 0.995,
            electron_readout_fidelity_0: 0.995,
            electron_readout_fidelity_1: 0.995,
            ..sota
        };
        let sq = derive_baseline_swap_quality(&uniform, 1.0).unwrap();
        assert!((sq - 0.99f64.powi(8)).abs() < 1e-12);
        assert!((sq - 0.9227).abs() < 1e-4);

        // direct product with the literature values: 0.7938187722199944
        let sq = derive_baseline_swap_quality(&sota, 1.0).unwrap();
        assert!((sq - 0.793_818_772_219_994_4).abs() < 1e-12);
        assert!((0.75..=0.90).contains(&sq));

        let broken = ColorCenterComponents { electron_1q_gate_fidelity: 0.4, ..sota };
        assert!(derive_baseline_swap_quality(&broken, 1.0).is_err());
        assert!(derive_baseline_swap_quality(&sota, 0.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(HardwareParams::new(1.0, 0, 0.9, 0.5, 0.9).is_err());
        assert!(HardwareParams::new(1.0, 3, 0.2, 0.5, 0.9).is_err());
        assert!(HardwareParams::new(1.0f64, 3, 0.9, 0.5, 0.9).is_ok());
        assert!((HardwareParams::<f64>::baseline().link_werner() - 0.773_333_333_333_333_3).abs() < 1e-12);
    }

    #[test]
    fn generic_over_f32() {
        let c = PathContext::new(BB_PSURV as f32);
        let cost = hardware_cost(&HardwareParams::<f32>::baseline(), &c).unwrap();
        assert!((cost.hardware_cost - 5.0).abs() < 1e-4);
    }
}
