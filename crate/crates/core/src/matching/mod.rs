//! Staged augmenting-path matchings.
//!
//! A matching at stage `i` admits no augmenting path of length `2i - 1` or
//! less. [`advance_stage`] reaches the next stage by Hopcroft–Karp phases:
//! a layered BFS finds the current shortest augmenting length, then a DFS in
//! `(vertex id, right id, label)` order flips a maximal vertex-disjoint family
//! of shortest paths.

mod engine;
mod extract;
mod layers;
pub mod oracle;

pub use engine::{
    advance_stage, is_augmenting_path, run_to_stage, run_until_stable, verify_no_short_augmenting_path, AugmentCheck,
    AugmentingPath, Matching, StageReport,
};
pub use extract::extract_equidecomposition;
pub use layers::AlternatingLayers;
