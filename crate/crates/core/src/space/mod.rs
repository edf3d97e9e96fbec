//! Finite stand-ins for the measure space, a set-predicate language and
//! measure estimation.

mod model;
mod predicate;
mod sampled;

pub use model::{build_model, ModelSpec, PointMap, SpaceModel, MODEL_CSV_SCHEMA, NONE};
pub use predicate::{CompiledPredicate, PredicateDoc, SetPredicate, PREDICATE_SCHEMA};
pub use sampled::{measure, saturate, Measurement, SampledSet};
