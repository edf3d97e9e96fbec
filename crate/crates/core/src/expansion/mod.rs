//! Averaging operators, spectral gaps and expanding word sets.

mod expander;
mod gap;
mod operator;
pub mod spectrum;
mod statistics;

pub use expander::{
    build_expander, lps_size_bound_log5, minimal_word_length, verify_expansion, Expander, ExpansionReport,
    ExpansionRow,
};
pub use gap::{estimate_gap, estimate_gap_with, GapConfig, GapEstimate};
pub use operator::AveragingOperator;
pub use statistics::{boundary_lower_bound, boundary_measure, edge_statistics, growth_chain, EdgeStatistics, GrowthStep};
