#![allow(dead_code)]

use std::sync::Arc;

use equidecomp::graphing::{bipartite_graphing, Edge, Graphing};
use equidecomp::group::{sl2z_generators, torus_translations, GeneratorSet};
use equidecomp::space::{build_model, SampledSet, SpaceModel};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn torus(q: usize) -> Arc<SpaceModel> {
    Arc::new(build_model("rational-torus", q, 0).unwrap())
}

pub fn punctured(q: usize) -> Arc<SpaceModel> {
    Arc::new(build_model("punctured-torus", q, 0).unwrap())
}

/// Disjoint random `A`, `B` of `k` points each on the `q`-torus, joined by a
/// random nonempty subset of the modular and translation generators.
pub fn random_torus_graphing(rng: &mut impl Rng, q: usize, k: usize) -> Graphing {
    let m = torus(q);
    let mut ids: Vec<usize> = (0..m.len()).collect();
    ids.shuffle(rng);
    let a = SampledSet::from_ids(&m, ids[..k].iter().copied()).unwrap();
    let b = SampledSet::from_ids(&m, ids[k..2 * k].iter().copied()).unwrap();
    let all = sl2z_generators().union(&torus_translations(q as u64).unwrap()).unwrap();
    let mut s = GeneratorSet::empty(all.kind, all.dim);
    s.alphabet = all.alphabet.clone();
    while s.members.is_empty() {
        s.members = all.members.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
    }
    bipartite_graphing(&a, &b, &s).unwrap()
}

/// Erdős–Rényi style bipartite graph with unit-mass vertices.
pub fn random_bipartite(rng: &mut impl Rng, n_left: usize, n_right: usize, p: f64) -> Graphing {
    let mut edges = Vec::new();
    for u in 0..n_left {
        for v in 0..n_right {
            if rng.random_bool(p) {
                edges.push(Edge { left: u as u32, right: v as u32, label: 0 });
            }
        }
    }
    Graphing::from_edges(n_left, n_right, edges, 1.0).unwrap()
}

/// Union of `d` uniformly random bijections between two `k`-point sides, one
/// label per bijection. Expanding with high probability once `d >= 3`.
pub fn random_permutation_graphing(rng: &mut impl Rng, k: usize, d: usize) -> Graphing {
    let mut edges = Vec::new();
    for label in 0..d {
        let mut perm: Vec<u32> = (0..k as u32).collect();
        perm.shuffle(rng);
        for (u, &v) in perm.iter().enumerate() {
            if !edges.iter().any(|e: &Edge| e.left == u as u32 && e.right == v) {
                edges.push(Edge { left: u as u32, right: v, label: label as u32 });
            }
        }
    }
    Graphing::from_edges(k, k, edges, 1.0).unwrap()
}
