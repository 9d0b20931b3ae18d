use proptest::prelude::*;

use repchain::metrics::{bqc_from_records, bqc_round_success_prob, skr_from_records};
use repchain::sim::{format_records, parse_records};
use repchain::PairRecord;

fn records() -> impl Strategy<Value = Vec<PairRecord>> {
    prop::collection::vec((0.0..=1.0f64, 1e-4..1.0f64), 2..60).prop_map(|v| {
        let mut t = 0.0;
        v.into_iter()
            .map(|(w, d)| {
                t += d;
                PairRecord { werner: w, delivery_time: t, generation_duration: d }
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn skr_never_exceeds_rate(recs in records()) {
        let r = skr_from_records(&recs).unwrap();
        prop_assert!(r.skr >= 0.0 && r.skr <= r.entanglement_rate * (1.0 + 1e-12));
        if r.qber > 0.0 {
            prop_assert!(r.skr < r.entanglement_rate);
        }
        let total: f64 = recs.iter().map(|x| x.generation_duration).sum();
        prop_assert!((r.entanglement_rate - recs.len() as f64 / total).abs() < 1e-9 * r.entanglement_rate);
    }

    #[test]
    fn perfect_records_keep_full_rates(d in prop::collection::vec(1e-4..1.0f64, 2..40)) {
        let mut t = 0.0;
        let recs: Vec<PairRecord> = d.iter().map(|&g| { t += g; PairRecord { werner: 1.0, delivery_time: t, generation_duration: g } }).collect();
        let skr = skr_from_records(&recs).unwrap();
        prop_assert_eq!(skr.skr, skr.entanglement_rate);
        let bqc = bqc_from_records(&recs, f64::INFINITY).unwrap();
        prop_assert_eq!(bqc.success_rate, bqc.round_rate);
    }

    #[test]
    fn success_prob_is_a_probability(w1 in 0.0..=1.0f64, w2 in 0.0..=1.0f64, dt in 0.0..100.0f64, t in 1e-3..100.0f64) {
        let p = bqc_round_success_prob(w1, w2, dt, t);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn success_prob_falls_with_storage(w1 in 0.0..=1.0f64, w2 in 0.0..=1.0f64, a in 0.0..10.0f64, b in 0.0..10.0f64, t in 0.1..10.0f64) {
        // fidelities (1 + w)/2 are at least one half
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(bqc_round_success_prob(w1, w2, hi, t) <= bqc_round_success_prob(w1, w2, lo, t) + 1e-15);
    }

    #[test]
    fn designation_symmetry(w1 in 0.0..=1.0f64, w2 in 0.0..=1.0f64, t in 0.1..10.0f64) {
        prop_assert_eq!(bqc_round_success_prob(w1, w2, 0.0, t), bqc_round_success_prob(w2, w1, 0.0, t));
    }

    #[test]
    fn dump_round_trip_is_exact(recs in records()) {
        let text = format_records(&[("seed".into(), "1".into())], &recs);
        prop_assert_eq!(parse_records::<f64>(&text).unwrap(), recs);
    }

    #[test]
    fn bqc_rate_is_half_of_pair_rate_for_even_streams(recs in records()) {
        let even = &recs[..recs.len() - recs.len() % 2];
        let bqc = bqc_from_records(even, 1.0).unwrap();
        let skr = skr_from_records(even).unwrap();
        prop_assert!((bqc.round_rate - skr.entanglement_rate / 2.0).abs() < 1e-9 * skr.entanglement_rate);
    }
}
