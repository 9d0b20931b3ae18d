use proptest::prelude::*;

use repchain::fibergrid::{
    chain_asymmetry, enumerate_placements, select_configuration, symmetrized_path, ChainConfiguration, FiberPath,
    FiberSegment,
};

fn binomial(n: i64, k: i64) -> usize {
    if k < 0 || n < k {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128) as usize
}

/// Placements counted by filtering every subset of the `sites` intermediate sites.
fn brute_force(sites: usize, r: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << sites))
        .filter(|m| m.count_ones() as usize == r)
        .map(|m| (1..=sites).filter(|s| m & (1 << (s - 1)) != 0).collect::<Vec<_>>())
        .filter(|c| {
            c.first().is_some_and(|&f| f >= 2) && c.last().is_some_and(|&l| l < sites) && c.windows(2).all(|w| w[1] - w[0] >= 2)
        })
        .collect()
}

fn path() -> impl Strategy<Value = FiberPath<f64>> {
    prop::collection::vec((1.0..150.0f64, 0.1..0.5f64), 2..=17).prop_map(|segs| {
        let n = segs.len();
        let segments = segs
            .into_iter()
            .enumerate()
            .map(|(i, (len, coeff))| FiberSegment::new(format!("s{i}"), format!("s{}", i + 1), len, len * coeff))
            .collect();
        let p = FiberPath::new(segments).unwrap();
        assert_eq!(p.num_segments(), n);
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_match_binomial_and_brute_force(p in path()) {
        let sites = p.num_segments() - 1;
        let table = enumerate_placements(&p, 8);
        for r in 1..=table.max_repeaters() {
            let mut brute = brute_force(sites, r);
            brute.sort();
            prop_assert_eq!(table.count(r), brute.len());
            prop_assert_eq!(table.count(r), binomial(sites as i64 - r as i64 - 1, r as i64));
            let mut got: Vec<Vec<usize>> = table.configurations(r).iter().map(|c| c.repeater_sites().to_vec()).collect();
            got.sort();
            prop_assert_eq!(got, brute);
        }
    }

    #[test]
    fn tables_are_sorted_and_links_cover_the_path(p in path()) {
        let table = enumerate_placements(&p, 8);
        for r in 1..=table.max_repeaters() {
            let confs = table.configurations(r);
            for w in confs.windows(2) {
                prop_assert!(w[0].asymmetry() <= w[1].asymmetry());
            }
            for c in confs {
                prop_assert_eq!(c.links().len(), r + 1);
                prop_assert!((c.total_length() - p.total_length()).abs() < 1e-9);
                let a = chain_asymmetry(c).unwrap();
                prop_assert!((0.0..1.0).contains(&a));
            }
        }
    }

    #[test]
    fn selector_is_monotone(p in path(), a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let table = enumerate_placements(&p, 8);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for r in 1..=table.max_repeaters() {
            let x = select_configuration(&table, r, lo).unwrap();
            let y = select_configuration(&table, r, hi).unwrap();
            prop_assert!(y.asymmetry() >= x.asymmetry());
        }
    }

    #[test]
    fn symmetrized_chains_have_zero_asymmetry(len in 10.0..2000.0f64, att in 1.0..500.0f64, r in 1usize..10) {
        let p = symmetrized_path(len, att, r).unwrap();
        let sites: Vec<usize> = (1..=r).map(|i| 2 * i).collect();
        let c = ChainConfiguration::on_path(&p, &sites).unwrap();
        prop_assert!(chain_asymmetry(&c).unwrap().abs() < 1e-12);
        let table = enumerate_placements(&p, r);
        prop_assert_eq!(table.count(r), 1);
    }
}
