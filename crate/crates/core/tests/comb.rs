mod common;

use num_bigint::BigUint;
use num_traits::One;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use speckle_trng::comb::binomial;
use speckle_trng::sim::gen_uniform_centroid_set;
use speckle_trng::{lex_rank, lex_unrank, predecessor_count, total_combinations, CentroidSet};

#[test]
fn binomial_matches_pascal() {
    let table = common::pascal(120);
    for n in 0..=120u64 {
        for k in 0..=n + 2 {
            assert_eq!(
                binomial(n, k),
                common::choose(&table, n as i64, k as i64),
                "C({n}, {k})"
            );
        }
    }
}

#[test]
fn total_rejects_overfull() {
    assert!(total_combinations(5, 6).is_err());
    assert_eq!(total_combinations(7, 0).unwrap(), BigUint::one());
}

#[test]
fn rank_reverses_lexicographic_order_up_to_ten() {
    for urns in 1..=10u64 {
        for n in 0..=urns as usize {
            let subsets = common::all_subsets(urns, n);
            let total = total_combinations(urns, n as u64).unwrap();
            assert_eq!(BigUint::from(subsets.len()), total);
            for (pos, s) in subsets.iter().enumerate() {
                let set = CentroidSet::new(0, urns, s.clone()).unwrap();
                let idx = lex_rank(&set);
                // the first subset in lexicographic order has the most successors
                assert_eq!(idx.rank, &total - 1u32 - BigUint::from(pos));
                assert_eq!(lex_unrank(&idx.rank, urns, n as u64).unwrap().occupied(), &s[..]);
            }
        }
    }
}

#[test]
fn double_sum_agrees_up_to_ten() {
    let table = common::pascal(12);
    for urns in 1..=10u64 {
        for n in 0..=urns as usize {
            for s in common::all_subsets(urns, n) {
                let set = CentroidSet::new(0, urns, s.clone()).unwrap();
                assert_eq!(
                    common::double_sum_predecessors(&table, urns, &s),
                    predecessor_count(&set)
                );
            }
        }
    }
}

#[test]
fn predecessor_identity_on_large_grids() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
    for _ in 0..300 {
        let urns = rng.random_range(1..=1_000_000u64);
        let n = rng.random_range(0..=urns.min(60));
        let set = CentroidSet::new(0, urns, gen_uniform_centroid_set(urns, n, &mut rng).unwrap()).unwrap();
        let idx = lex_rank(&set);
        assert_eq!(predecessor_count(&set) + &idx.rank + 1u32, idx.total);
        assert_eq!(lex_unrank(&idx.rank, urns, n).unwrap(), set);
    }
}

#[test]
fn dense_and_packed_extremes() {
    // all urns occupied, first urns, last urns
    let full = CentroidSet::new(0, 500, (1..=500).collect()).unwrap();
    assert_eq!(lex_rank(&full).rank, BigUint::from(0u32));
    let first = CentroidSet::new(0, 3000, (1..=1000).collect()).unwrap();
    assert_eq!(lex_rank(&first).rank, binomial(3000, 1000) - 1u32);
    let last = CentroidSet::new(0, 3000, (2001..=3000).collect()).unwrap();
    assert_eq!(lex_rank(&last).rank, BigUint::from(0u32));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unrank_inverts_rank(urns in 1u64..5000, frac in 0.0f64..1.0, seed: u64) {
        let n = ((urns as f64) * frac * 0.2) as u64;
        let set = speckle_trng::sim::uniform_centroid_set(urns, n, seed).unwrap();
        let idx = lex_rank(&set);
        prop_assert!(idx.rank < idx.total);
        prop_assert_eq!(lex_unrank(&idx.rank, urns, n).unwrap(), set);
    }
}
