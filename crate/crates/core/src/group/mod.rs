//! Group elements, words and generator multisets.

mod element;
mod generators;

pub use element::{ElementKind, Entries, GroupElement, FLOAT_EQ_TOL};
pub use generators::{
    identity_multiset, lps_generators, plane_translations, torus_translation_set,
    reduced_words, sl2z_generators, torus_translations, word_products, ElementIndex,
    GeneratorSet, Letter, Member, NamedGenerator, Word, GENERATORS_SCHEMA,
};
