//! Equidecompositions under measure-preserving group actions.
//!
//! The crate builds explicit equidecomposition certificates on finite
//! invariant models (the rational torus and planar grids) and checks the
//! geometric and spectral ingredients of the construction statistically on
//! sampled continuous models (sphere, annulus, cube).
//!
//! Module map:
//!
//! * [`group`]: exact and floating group elements, generator sets and words.
//! * [`space`]: finite models of the measure space, set predicates, measures.
//! * [`graphing`]: bipartite graphings induced by finite sets of motions.
//! * [`matching`]: staged augmenting-path matchings and piece extraction.
//! * [`expansion`]: averaging operators, spectral gaps, expanding word sets.
//! * [`foliation`]: annulus foliation, cube diffuser and bound ledgers.
//! * [`pipeline`]: the end-to-end recipe and certificate validation.

pub mod error;
pub mod expansion;
pub mod foliation;
pub mod graphing;
pub mod group;
pub mod matching;
pub mod numeric;
pub mod par;
pub mod pipeline;
pub mod space;

pub use error::{Error, Result};
