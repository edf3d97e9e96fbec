//! Orchestration: open-set reduction, disjointification, the matching-based
//! equidecomposition, and certificates with an independent validator.

mod certificate;
mod equidecompose;
mod reduce;

pub use certificate::{
    chain_certificates, validate_certificate, Certificate, Piece, ValidationMode, ValidationReport, CERTIFICATE_SCHEMA,
};
pub use equidecompose::{
    disjointify, equidecompose, test_family, EquidecomposeConfig, EquidecomposeOutcome, GapSource, NamedGenerators,
};
pub use reduce::{check_cover, reduce_to_open, Reduction, ReductionCheck};
