use proptest::prelude::*;

use repchain::oracle::{bell_swap, chain_werner, werner_state, DensityMatrix};
use repchain::sim::{decohere_werner, swap_werner};

fn two_qubit_state() -> impl Strategy<Value = DensityMatrix<f64>> {
    // mixtures of Werner states with locally depolarized ones stay valid states
    (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(w, p, q)| {
        werner_state(w).unwrap().depolarize(p, &[0]).unwrap().depolarize(q, &[1]).unwrap()
    })
}

proptest! {
    #[test]
    fn swap_of_werner_states_is_werner(w1 in 0.0..=1.0f64, w2 in 0.0..=1.0f64, sq in 0.0..=1.0f64) {
        let out = bell_swap(&werner_state(w1).unwrap(), &werner_state(w2).unwrap(), sq).unwrap();
        let w = out.as_werner(1e-10);
        prop_assert!(w.is_some());
        prop_assert!((w.unwrap() - swap_werner(w1, w2, sq)).abs() < 1e-10);
        prop_assert!(out.is_hermitian(1e-12) && out.is_positive_semidefinite(1e-9));
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_preserves_trace_and_hermiticity(rho in two_qubit_state(), p in 0.0..=1.0f64, both in any::<bool>()) {
        let targets: &[usize] = if both { &[0, 1] } else { &[1] };
        let out = rho.depolarize(p, targets).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.trace().im.abs() < 1e-12);
        prop_assert!(out.is_hermitian(1e-12));
        prop_assert!(out.is_positive_semidefinite(1e-9));
    }

    #[test]
    fn three_link_composition_matches_product(
        w in prop::array::uniform3(0.5..=1.0f64),
        sq in 0.8..=1.0f64,
        t in 0.1..10.0f64,
        s in prop::array::uniform4(0.0..=1.0f64),
    ) {
        let storage = [(0.0, s[0] * t), (s[1] * t, s[2] * t), (s[3] * t, 0.0)];
        let reference = chain_werner(&w, &storage, sq, t).unwrap();
        let held: Vec<f64> = w.iter().zip(storage).map(|(&x, (l, r))| decohere_werner(decohere_werner(x, l, t), r, t)).collect();
        let product = swap_werner(swap_werner(held[0], held[1], sq), held[2], sq);
        prop_assert!((reference - product).abs() < 1e-9);
    }
}
