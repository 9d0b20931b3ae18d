use proptest::prelude::*;

use repchain::hardware::{
    hardware_cost, improve_probability, improvement_factor, no_imperfection_prob, value_for_factor, HardwareParams,
    Parameter, PathContext,
};

const CTX: PathContext<f64> = PathContext { p_surv_baseline: 2.979_323_4e-3 };

fn parameter() -> impl Strategy<Value = Parameter> {
    prop::sample::select(Parameter::ALL.to_vec())
}

/// A value inside the parameter's domain, short of the perfect limit.
fn value_for(p: Parameter) -> BoxedStrategy<f64> {
    match p {
        Parameter::CoherenceTime => (1e-3..1e4f64).boxed(),
        Parameter::NumModes => (1u64..5000).prop_map(|n| n as f64).boxed(),
        Parameter::LinkFidelity => (0.26..0.9999f64).boxed(),
        Parameter::DetectionProb | Parameter::SwapQuality => (1e-4..0.9999f64).boxed(),
    }
}

fn params() -> impl Strategy<Value = HardwareParams<f64>> {
    (1e-2..1e3f64, 1u64..3000, 0.26..0.9999f64, 1e-3..0.9999f64, 1e-3..0.9999f64).prop_map(|(t, n, f, d, s)| {
        HardwareParams { coherence_time: t, num_modes: n, link_fidelity: f, detection_prob: d, swap_quality: s }
    })
}

proptest! {
    #[test]
    fn factor_increases_with_no_imperfection_prob(
        (p, a, b) in parameter().prop_flat_map(|p| (Just(p), value_for(p), value_for(p)))
    ) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (pa, pb) = (no_imperfection_prob(p, lo, &CTX).unwrap(), no_imperfection_prob(p, hi, &CTX).unwrap());
        let (ka, kb) = (improvement_factor(p, lo, &CTX).unwrap(), improvement_factor(p, hi, &CTX).unwrap());
        // every parameter's no-imperfection probability rises with its value
        prop_assert!(pa <= pb);
        if pa < pb {
            prop_assert!(ka < kb, "{p}: k({lo}) = {ka}, k({hi}) = {kb}");
        }
    }

    #[test]
    fn coherence_scaling_is_root_improvement(k in 0.05..500.0f64, t_base in 0.01..100.0f64) {
        let scaled = no_imperfection_prob(Parameter::CoherenceTime, k * t_base, &CTX).unwrap();
        let rooted = improve_probability(no_imperfection_prob(Parameter::CoherenceTime, t_base, &CTX).unwrap(), k);
        prop_assert!((scaled - rooted).abs() <= 1e-12 * rooted.max(1e-300));
    }

    #[test]
    fn factor_inverse_round_trips(p in parameter(), k in 0.2..200.0f64) {
        let v = value_for_factor(p, k, &CTX);
        prop_assume!(p != Parameter::NumModes || v >= 1.0);
        if p == Parameter::NumModes {
            // modes are real-valued here; compare in probability space
            let target = improve_probability(no_imperfection_prob(p, 1.0, &CTX).unwrap(), k);
            let back = 1.0 - (1.0 - CTX.p_surv_baseline).powf(v);
            prop_assert!((back - target).abs() < 1e-9);
        } else {
            prop_assert!((improvement_factor(p, v, &CTX).unwrap() - k).abs() <= 1e-9 * k);
        }
    }

    #[test]
    fn cost_is_sum_of_factors(hw in params(), order in Just(Parameter::ALL.to_vec()).prop_shuffle()) {
        let cost = hardware_cost(&hw, &CTX).unwrap();
        let summed: f64 = order.iter().map(|&p| improvement_factor(p, hw.value(p), &CTX).unwrap()).sum();
        prop_assert!((cost.hardware_cost - summed).abs() <= 1e-9 * summed);
        for p in Parameter::ALL {
            prop_assert_eq!(cost.factor(p), improvement_factor(p, hw.value(p), &CTX).unwrap());
        }
    }
}

#[test]
fn baseline_factors_are_one() {
    let base = HardwareParams::<f64>::baseline();
    for p in Parameter::ALL {
        assert!((improvement_factor(p, base.value(p), &CTX).unwrap() - 1.0).abs() < 1e-15, "{p}");
    }
    assert!((hardware_cost(&base, &CTX).unwrap().hardware_cost - 5.0).abs() < 1e-14);
}

#[test]
#[allow(clippy::approx_constant)] // 3.14 s, not π
fn coherence_factor_is_time_ratio() {
    let k = improvement_factor(Parameter::CoherenceTime, 3.14, &CTX).unwrap();
    assert!((k - 3.14).abs() < 1e-12);
}
