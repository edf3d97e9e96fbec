mod common;

use equidecomp::matching::oracle::{exhaustive_augmenting_path_exists, maximum_matching_size};
use equidecomp::matching::{advance_stage, is_augmenting_path, run_to_stage, verify_no_short_augmenting_path, Matching};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stages_are_valid_and_certified(seed in any::<u64>(), nl in 1usize..30, nr in 1usize..30, p in 0.02f64..0.4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_bipartite(&mut rng, nl, nr, p);
        let mut m = Matching::empty(&g);
        let mut prev_unmatched = f64::INFINITY;
        for _ in 0..8 {
            let (next, rep) = advance_stage(&g, &m);
            prop_assert!(next.is_valid(&g));
            prop_assert!(rep.flipped_edge_mass <= rep.flip_bound + 1e-12);
            let unmatched = rep.unmatched_left_mass + rep.unmatched_right_mass;
            prop_assert!(unmatched <= prev_unmatched + 1e-12);
            prev_unmatched = unmatched;
            let len = 2 * next.stage as usize - 1;
            prop_assert!(verify_no_short_augmenting_path(&g, &next, len).ok);
            prop_assert!(!exhaustive_augmenting_path_exists(&g, &next, len));
            m = next;
        }
        let (fin, _) = run_to_stage(&g, (nl + nr) as u32);
        prop_assert_eq!(fin.size(), maximum_matching_size(&g));
    }

    #[test]
    fn witnesses_are_augmenting_paths(seed in any::<u64>(), n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_bipartite(&mut rng, n, n, 0.2);
        let m = Matching::empty(&g);
        let check = verify_no_short_augmenting_path(&g, &m, 2 * n + 1);
        prop_assert_eq!(check.ok, g.edges.is_empty());
        if let Some(w) = check.witness {
            prop_assert!(is_augmenting_path(&g, &m, &w));
        }
    }
}

#[test]
fn permutation_graphings_match_perfectly() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in [5, 40, 200] {
        let g = common::random_permutation_graphing(&mut rng, k, 3);
        let (m, _) = run_to_stage(&g, 64);
        assert_eq!(m.size(), k);
    }
}
