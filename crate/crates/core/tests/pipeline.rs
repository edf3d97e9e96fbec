use std::sync::Arc;

use equidecomp::group::{plane_translations, GeneratorSet};
use equidecomp::numeric::qi;
use equidecomp::pipeline::{
    chain_certificates, equidecompose, reduce_to_open, validate_certificate, Certificate, EquidecomposeConfig,
};
use equidecomp::space::{ModelSpec, SampledSet, SetPredicate, SpaceModel};
use equidecomp::Error;

fn example(q: u64) -> (Arc<SpaceModel>, EquidecomposeConfig) {
    let cfg = EquidecomposeConfig::torus_example(q, 4).unwrap();
    (Arc::new(SpaceModel::build(&cfg.model).unwrap()), cfg)
}

#[test]
fn piece_count_is_bounded_by_the_label_set() {
    let (model, cfg) = example(32);
    let out = equidecompose(&model, &cfg).unwrap();
    assert!(out.certificate.piece_count() <= out.s_size);
    assert!(out.s_size <= 2 * cfg.cover.len() * out.r_size);
    assert_eq!(out.certificate.source_mass, out.certificate.target_mass);
    assert!(out.doubled);
}

#[test]
fn unequal_measures_are_rejected() {
    let (model, mut cfg) = example(32);
    cfg.b = SetPredicate::rect(&[0.0, 0.0], &[0.5, 0.75]);
    assert!(matches!(equidecompose(&model, &cfg), Err(Error::MeasureMismatch { .. })));
}

#[test]
fn certificates_round_trip_and_detect_tampering() {
    let (model, cfg) = example(32);
    let out = equidecompose(&model, &cfg).unwrap();
    let a = SampledSet::from_predicate(&model, &cfg.a).unwrap();
    let b = SampledSet::from_predicate(&model, &cfg.b).unwrap();
    let back = Certificate::from_json(&out.certificate.to_json().unwrap()).unwrap();
    assert!(validate_certificate(&back, &model, &a, &b).ok);

    let mut bad = back.clone();
    let moved = bad.pieces[0].points.as_mut().unwrap().pop().unwrap();
    bad.pieces[1].points.as_mut().unwrap().push(moved);
    assert!(!validate_certificate(&bad, &model, &a, &b).ok);

    let mut dropped = back;
    dropped.pieces.pop();
    assert!(!validate_certificate(&dropped, &model, &a, &b).ok);
}

#[test]
fn chained_certificates_compose() {
    let (model, cfg) = example(32);
    let forward = equidecompose(&model, &cfg).unwrap().certificate;
    let mut rev = cfg.clone();
    std::mem::swap(&mut rev.a, &mut rev.b);
    let backward = equidecompose(&model, &rev).unwrap().certificate;
    let chained = chain_certificates(&forward, &backward, &model).unwrap();
    let a = SampledSet::from_predicate(&model, &cfg.a).unwrap();
    assert!(validate_certificate(&chained, &model, &a, &a).ok);
    assert!(chained.piece_count() <= forward.piece_count() * backward.piece_count());
}

#[test]
fn trivial_cover_reduces_with_one_motion_class() {
    let model = Arc::new(SpaceModel::build(&ModelSpec::PlaneGrid { q: 16, lo: [-32, -32], hi: [32, 32] }).unwrap());
    let t: GeneratorSet = plane_translations(&[[qi(0), qi(0)]]).unwrap();
    let a = SetPredicate::rect(&[-1.0, -1.0], &[1.0, 1.0]);
    let r = reduce_to_open(&model, &a, &t, &SetPredicate::rect(&[-0.5, -0.5], &[0.5, 0.5])).unwrap();
    assert!(r.check.pieces_partition_source && r.check.images_partition_target && r.check.images_union_is_c);
    assert_eq!(r.check.distinct_motions, 1);
}
