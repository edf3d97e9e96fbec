mod common;

use equidecomp::expansion::spectrum::{dense_mean_zero_norm, punctured_block_norm};
use equidecomp::expansion::{
    boundary_lower_bound, boundary_measure, edge_statistics, estimate_gap_with, growth_chain, minimal_word_length,
    AveragingOperator, GapConfig,
};
use equidecomp::group::{sl2z_generators, torus_translations, GeneratorSet};
use equidecomp::par::Exec;
use equidecomp::space::SampledSet;
use proptest::prelude::*;

fn subset_symmetric(all: &GeneratorSet, pick: u32) -> GeneratorSet {
    let mut s = all.clone();
    s.members = all.members.iter().enumerate().filter(|(i, _)| pick >> (i / 2) & 1 == 1).map(|(_, m)| m.clone()).collect();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn edge_statistics_inequality_on_random_sets(mask in proptest::collection::vec(any::<bool>(), 168)) {
        let model = common::punctured(13);
        let gens = sl2z_generators();
        let c = 1.0 - punctured_block_norm(13, &gens).unwrap();
        let y = SampledSet::from_mask(&model, mask).unwrap();
        let s = edge_statistics(&model, &gens, &y).unwrap();
        prop_assert!(s.identities_hold());
        prop_assert!(s.satisfies(c));
        let b = boundary_measure(&model, &gens, &y).unwrap();
        prop_assert!(b + 1e-12 >= boundary_lower_bound(&s, gens.len()));
    }

    #[test]
    fn growth_is_monotone_and_dominates_the_certificate(mask in proptest::collection::vec(prop::bool::weighted(0.05), 168)) {
        let model = common::punctured(13);
        let gens = sl2z_generators();
        let c = 1.0 - punctured_block_norm(13, &gens).unwrap();
        let y = SampledSet::from_mask(&model, mask).unwrap();
        prop_assume!(y.count() > 0);
        let chain = growth_chain(&model, &gens, &y, c, 0.1, 6).unwrap();
        for w in chain.windows(2) {
            prop_assert!(w[1].measure >= w[0].measure);
        }
        for step in &chain {
            prop_assert!(step.measure + 1e-12 >= step.certified.min(0.9));
        }
    }

    #[test]
    fn minimal_word_length_is_minimal(c in 0.01f64..0.99, eta in 0.001f64..0.5, q in 1usize..12) {
        let l = minimal_word_length(c, eta, q).unwrap();
        let step = (c * eta / q as f64).ln_1p();
        prop_assert!(l as f64 * step > (1.0 / eta).ln());
        prop_assert!(l == 1 || (l - 1) as f64 * step <= (1.0 / eta).ln());
    }

    #[test]
    fn krylov_estimate_matches_dense_eigensolve(q in 5u64..12, pick in 1u32..64) {
        let model = common::torus(q as usize);
        let all = sl2z_generators().union(&torus_translations(q).unwrap()).unwrap();
        let picked = subset_symmetric(&all, pick);
        prop_assume!(!picked.is_empty());
        let gens = picked.symmetrized_with_identity().unwrap();
        prop_assert!(gens.is_symmetric());
        let op = AveragingOperator::new(&model, &gens).unwrap();
        let est = estimate_gap_with(&op, &GapConfig::default(), Exec::Parallel);
        prop_assert!((est.norm - dense_mean_zero_norm(&op)).abs() < 1e-7);
    }
}

#[test]
fn sequential_and_parallel_estimates_are_identical() {
    let model = common::punctured(31);
    let op = AveragingOperator::new(&model, &sl2z_generators()).unwrap();
    let cfg = GapConfig::default();
    let a = estimate_gap_with(&op, &cfg, Exec::Sequential);
    let b = estimate_gap_with(&op, &cfg, Exec::Parallel);
    assert_eq!(a.norm.to_bits(), b.norm.to_bits());
}

#[test]
fn minimal_word_length_rejects_out_of_range() {
    assert!(minimal_word_length(0.0, 0.1, 4).is_err());
    assert!(minimal_word_length(0.5, 1.0, 4).is_err());
    assert!(minimal_word_length(0.5, 0.1, 0).is_err());
}
