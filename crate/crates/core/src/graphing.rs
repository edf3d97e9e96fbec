//! Bipartite graphings induced by finite sets of motions.
//!
//! Vertices on each side are numbered locally (`0..n_left`, `0..n_right`);
//! the optional [`GraphOrigin`] maps them back to model points. Parallel
//! edges with distinct labels are kept.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::group::{GeneratorSet, GroupElement};
use crate::numeric::Q;
use crate::par::{self, Exec};
use crate::space::{SampledSet, SpaceModel, NONE};
use crate::{Error, Result};

pub const ADJACENCY_SCHEMA: &str = "equidecomp.adjacency/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub left: u32,
    pub right: u32,
    pub label: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Vertex {
    Left(u32),
    Right(u32),
}

/// Where the vertices of a graphing live.
#[derive(Clone, Debug)]
pub struct GraphOrigin {
    pub model: Arc<SpaceModel>,
    pub left: SampledSet,
    pub right: SampledSet,
    pub left_ids: Vec<u32>,
    pub right_ids: Vec<u32>,
    pub labels: GeneratorSet,
    /// Left and right sides are separate copies of the model.
    pub doubled: bool,
}

/// A Borel arrow `(U, g)`: every `x ∈ U` is joined to `g.x`.
#[derive(Clone, Debug)]
pub struct BorelArrow {
    pub domain: SampledSet,
    pub element: GroupElement,
    pub label: usize,
}

#[derive(Clone, Debug)]
pub struct Graphing {
    pub n_left: usize,
    pub n_right: usize,
    /// Sorted by `(left, right, label)`.
    pub edges: Vec<Edge>,
    /// Mass of each vertex.
    pub weight: f64,
    pub exact_weight: Option<Q>,
    pub origin: Option<GraphOrigin>,
    left_off: Vec<usize>,
    right_off: Vec<usize>,
    /// Edge ids sorted by `(right, left, label)`.
    right_adj: Vec<u32>,
}

impl Graphing {
    /// Builds a graphing from an explicit edge list.
    pub fn from_edges(n_left: usize, n_right: usize, mut edges: Vec<Edge>, weight: f64) -> Result<Graphing> {
        if let Some(e) = edges.iter().find(|e| e.left as usize >= n_left || e.right as usize >= n_right) {
            return Err(Error::InvalidArgument(format!("edge {e:?} out of range")));
        }
        edges.sort_unstable();
        edges.dedup();
        let mut left_off = vec![0usize; n_left + 1];
        let mut right_off = vec![0usize; n_right + 1];
        for e in &edges {
            left_off[e.left as usize + 1] += 1;
            right_off[e.right as usize + 1] += 1;
        }
        for i in 0..n_left {
            left_off[i + 1] += left_off[i];
        }
        for i in 0..n_right {
            right_off[i + 1] += right_off[i];
        }
        let mut right_adj: Vec<u32> = (0..edges.len() as u32).collect();
        right_adj.sort_by_key(|&k| {
            let e = edges[k as usize];
            (e.right, e.left, e.label)
        });
        Ok(Graphing { n_left, n_right, edges, weight, exact_weight: None, origin: None, left_off, right_off, right_adj })
    }

    pub fn left_edges(&self, u: usize) -> std::ops::Range<usize> {
        self.left_off[u]..self.left_off[u + 1]
    }

    pub fn right_edges(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.right_adj[self.right_off[v]..self.right_off[v + 1]].iter().map(|&k| k as usize)
    }

    pub fn degree(&self, v: Vertex) -> usize {
        match v {
            Vertex::Left(u) => self.left_off[u as usize + 1] - self.left_off[u as usize],
            Vertex::Right(w) => self.right_off[w as usize + 1] - self.right_off[w as usize],
        }
    }

    pub fn max_degree(&self) -> usize {
        let l = (0..self.n_left).map(|u| self.degree(Vertex::Left(u as u32)));
        let r = (0..self.n_right).map(|w| self.degree(Vertex::Right(w as u32)));
        l.chain(r).max().unwrap_or(0)
    }

    pub fn edge_mass(&self) -> f64 {
        self.edges.len() as f64 * self.weight
    }

    /// Orientation-blind neighborhood from adjacency lists.
    pub fn neighborhood(&self, y: &[Vertex]) -> BTreeSet<Vertex> {
        let mut out = BTreeSet::new();
        for &v in y {
            match v {
                Vertex::Left(u) => {
                    for k in self.left_edges(u as usize) {
                        out.insert(Vertex::Right(self.edges[k].right));
                    }
                }
                Vertex::Right(w) => {
                    for k in self.right_edges(w as usize) {
                        out.insert(Vertex::Left(self.edges[k].left));
                    }
                }
            }
        }
        out
    }

    /// The arrows `(A ∩ g^-1.B, g)`, one per label.
    pub fn arrows(&self) -> Result<Vec<BorelArrow>> {
        let o = self.origin.as_ref().ok_or_else(|| Error::InvalidArgument("graphing has no model".into()))?;
        let mut domains = vec![vec![false; o.model.len()]; o.labels.len()];
        for e in &self.edges {
            domains[e.label as usize][o.left_ids[e.left as usize] as usize] = true;
        }
        domains
            .into_iter()
            .zip(&o.labels.members)
            .enumerate()
            .map(|(label, (mask, m))| {
                Ok(BorelArrow { domain: SampledSet::from_mask(&o.model, mask)?, element: m.element.clone(), label })
            })
            .collect()
    }

    /// Adjacency JSON with vertex ids as model point ids and labels as words.
    pub fn adjacency_json(&self) -> Result<serde_json::Value> {
        let (left, right, labels, doubled) = match &self.origin {
            Some(o) => (
                o.left_ids.clone(),
                o.right_ids.clone(),
                o.labels.members.iter().map(|m| o.labels.render(&m.word)).collect::<Vec<_>>(),
                o.doubled,
            ),
            None => ((0..self.n_left as u32).collect(), (0..self.n_right as u32).collect(), Vec::new(), false),
        };
        let edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| {
                serde_json::json!({
                    "left": left[e.left as usize],
                    "right": right[e.right as usize],
                    "label": e.label,
                    "word": labels.get(e.label as usize),
                })
            })
            .collect();
        Ok(serde_json::json!({
            "schema": ADJACENCY_SCHEMA,
            "doubled": doubled,
            "vertex_mass": self.weight,
            "left": left,
            "right": right,
            "labels": labels,
            "edges": edges,
        }))
    }
}

fn build(a: &SampledSet, b: &SampledSet, s: &GeneratorSet, doubled: bool) -> Result<Graphing> {
    if !Arc::ptr_eq(&a.model, &b.model) {
        return Err(Error::IncompatibleModel);
    }
    let model = a.model.clone();
    if !model.supports_transport() {
        return Err(Error::NotExact("graphings need an exact or orbit-closed model".into()));
    }
    if !doubled {
        let overlap = a.intersection(b)?.count();
        if overlap > 0 {
            return Err(Error::NotDisjoint(overlap));
        }
    }
    let left_ids: Vec<u32> = a.ids().into_iter().map(|i| i as u32).collect();
    let right_ids: Vec<u32> = b.ids().into_iter().map(|i| i as u32).collect();
    let mut right_local = vec![NONE; model.len()];
    for (k, &j) in right_ids.iter().enumerate() {
        right_local[j as usize] = k as u32;
    }
    let members: Vec<(usize, &GroupElement)> = s.elements().enumerate().collect();
    let per_label = par::map_slice(Exec::Parallel, &members, |&(label, g)| -> Result<Vec<Edge>> {
        let map = model.transport(g)?;
        Ok(left_ids
            .iter()
            .enumerate()
            .filter_map(|(k, &x)| {
                let y = map.image[x as usize];
                (y != NONE && right_local[y as usize] != NONE).then(|| Edge {
                    left: k as u32,
                    right: right_local[y as usize],
                    label: label as u32,
                })
            })
            .collect())
    });
    let mut edges = Vec::new();
    for e in per_label {
        edges.extend(e?);
    }
    let mut g = Graphing::from_edges(left_ids.len(), right_ids.len(), edges, model.weight)?;
    g.exact_weight = model.exact_weight;
    g.origin = Some(GraphOrigin {
        model,
        left: a.clone(),
        right: b.clone(),
        left_ids,
        right_ids,
        labels: s.clone(),
        doubled,
    });
    Ok(g)
}

/// Edges `{(x, g) : x ∈ A, g.x ∈ B, g ∈ S}` for disjoint `A`, `B`.
pub fn bipartite_graphing(a: &SampledSet, b: &SampledSet, s: &GeneratorSet) -> Result<Graphing> {
    build(a, b, s, false)
}

/// The same edge set with `A` and `B` read as subsets of two separate copies
/// of the model, so they may overlap.
pub fn doubled_graphing(a: &SampledSet, b: &SampledSet, s: &GeneratorSet) -> Result<Graphing> {
    build(a, b, s, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{sl2z_generators, torus_translation_set, ElementKind};
    use crate::numeric::{q, qi};
    use crate::space::{build_model, SetPredicate};

    fn setup(q_: usize) -> (Arc<SpaceModel>, SampledSet, SampledSet) {
        let m = Arc::new(build_model("rational-torus", q_, 0).unwrap());
        let a = SampledSet::from_predicate(&m, &SetPredicate::rect(&[0.0, 0.0], &[0.5, 1.0])).unwrap();
        let b = a.complement();
        (m, a, b)
    }

    #[test]
    fn empty_label_set() {
        let (_, a, b) = setup(6);
        let g = bipartite_graphing(&a, &b, &GeneratorSet::empty(ElementKind::TorusAutomorphism, 2)).unwrap();
        assert!(g.edges.is_empty());
    }

    #[test]
    fn edge_count_matches_brute_force() {
        let (m, a, b) = setup(10);
        let s = sl2z_generators();
        let g = bipartite_graphing(&a, &b, &s).unwrap();
        let mut brute = 0;
        for x in a.ids() {
            for el in s.elements() {
                let y = el.apply_exact(&m.exact_point(x).unwrap()).unwrap();
                if b.contains(m.index_of_exact(&y).unwrap()) {
                    brute += 1;
                }
            }
        }
        assert_eq!(g.edges.len(), brute);
        assert!(g.max_degree() <= s.len());
    }

    #[test]
    fn translate_is_a_bijection() {
        let (m, a, b) = setup(8);
        let t = torus_translation_set(&[[q(1, 2), qi(0)]]).unwrap();
        let g = bipartite_graphing(&a, &b, &t).unwrap();
        assert_eq!(g.edges.len(), a.count());
        assert!((0..g.n_left).all(|u| g.degree(Vertex::Left(u as u32)) == 1));
        let y: Vec<Vertex> = (0..5).map(Vertex::Left).collect();
        let n = g.neighborhood(&y);
        let o = g.origin.as_ref().unwrap();
        let moved: BTreeSet<u32> = (0..5u32)
            .map(|u| m.transport(&t.members[0].element).unwrap().image[o.left_ids[u as usize] as usize])
            .collect();
        let got: BTreeSet<u32> = n
            .iter()
            .map(|v| match v {
                Vertex::Right(w) => o.right_ids[*w as usize],
                Vertex::Left(_) => unreachable!(),
            })
            .collect();
        assert_eq!(got, moved);
        assert!(g.neighborhood(&[]).is_empty());
    }

    #[test]
    fn overlapping_sides_rejected() {
        let (_, a, _) = setup(4);
        assert!(matches!(bipartite_graphing(&a, &a, &sl2z_generators()), Err(Error::NotDisjoint(8))));
        assert!(doubled_graphing(&a, &a, &sl2z_generators()).is_ok());
    }

    #[test]
    fn inverse_pairs_resolve_to_the_same_edge() {
        let (m, a, b) = setup(9);
        let s = sl2z_generators();
        let g = bipartite_graphing(&a, &b, &s).unwrap();
        let o = g.origin.as_ref().unwrap();
        for e in &g.edges {
            let el = &s.members[e.label as usize].element;
            let y = o.right_ids[e.right as usize] as usize;
            let back = m.transport(&el.inverse().unwrap()).unwrap().image[y];
            assert_eq!(back, o.left_ids[e.left as usize]);
        }
        let arrows = g.arrows().unwrap();
        assert_eq!(arrows.iter().map(|r| r.domain.count()).sum::<usize>(), g.edges.len());
    }
}
