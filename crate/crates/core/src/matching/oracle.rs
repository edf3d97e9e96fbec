//! Reference algorithms used to cross-check the staged engine.

use crate::graphing::Graphing;
use crate::space::NONE;

use super::Matching;

/// Maximum matching size by Kuhn's augmenting-path algorithm, one DFS per
/// left vertex. Independent of the layered engine.
pub fn maximum_matching_size(g: &Graphing) -> usize {
    let mut mate_right = vec![NONE; g.n_right];
    let mut size = 0;
    for u in 0..g.n_left {
        let mut seen = vec![false; g.n_right];
        if kuhn(g, u, &mut seen, &mut mate_right) {
            size += 1;
        }
    }
    size
}

fn kuhn(g: &Graphing, u: usize, seen: &mut [bool], mate_right: &mut [u32]) -> bool {
    for k in g.left_edges(u) {
        let v = g.edges[k].right as usize;
        if seen[v] {
            continue;
        }
        seen[v] = true;
        if mate_right[v] == NONE || kuhn(g, mate_right[v] as usize, seen, mate_right) {
            mate_right[v] = u as u32;
            return true;
        }
    }
    false
}

/// Exhaustive search over simple alternating paths of length `<= max_len`
/// starting at free left vertices.
pub fn exhaustive_augmenting_path_exists(g: &Graphing, m: &Matching, max_len: usize) -> bool {
    let mut on_left = vec![false; g.n_left];
    let mut on_right = vec![false; g.n_right];
    (0..g.n_left).any(|u| m.mate_left[u] == NONE && dfs(g, m, u, 1, max_len, &mut on_left, &mut on_right))
}

fn dfs(g: &Graphing, m: &Matching, u: usize, len: usize, max_len: usize, on_left: &mut [bool], on_right: &mut [bool]) -> bool {
    if len > max_len {
        return false;
    }
    on_left[u] = true;
    let mut found = false;
    for k in g.left_edges(u) {
        if m.mate_left[u] == k as u32 {
            continue;
        }
        let v = g.edges[k].right as usize;
        if on_right[v] {
            continue;
        }
        let w = m.mate_right[v];
        if w == NONE {
            found = true;
            break;
        }
        let lw = g.edges[w as usize].left as usize;
        if on_left[lw] {
            continue;
        }
        on_right[v] = true;
        let hit = dfs(g, m, lw, len + 2, max_len, on_left, on_right);
        on_right[v] = false;
        if hit {
            found = true;
            break;
        }
    }
    on_left[u] = false;
    found
}

/// Exact Hall-type expansion constant of a small graphing: the largest `c`
/// with `|N(Y)| >= min(t, (1+c)|Y|)` for every nonempty one-sided `Y` with
/// `|Y| < t`, where `t` is the threshold in vertex counts. Exponential;
/// intended for at most ~16 vertices per side.
pub fn exact_expansion_constant(g: &Graphing, threshold: f64) -> f64 {
    let mut c = f64::INFINITY;
    let mut side = |n: usize, nbr: &dyn Fn(u32) -> u64| {
        for set in 1u32..(1u32 << n) {
            let size = set.count_ones() as f64;
            let nb = nbr(set).count_ones() as f64;
            if nb >= threshold {
                continue;
            }
            c = c.min(nb / size - 1.0);
        }
    };
    let left_nbr: Vec<u64> = (0..g.n_left)
        .map(|u| g.left_edges(u).fold(0u64, |acc, k| acc | 1 << g.edges[k].right))
        .collect();
    let right_nbr: Vec<u64> = (0..g.n_right)
        .map(|v| g.right_edges(v).fold(0u64, |acc, k| acc | 1 << g.edges[k].left))
        .collect();
    let union = |tbl: &Vec<u64>, set: u32| (0..tbl.len()).filter(|i| set >> i & 1 == 1).fold(0u64, |a, i| a | tbl[i]);
    side(g.n_left, &|s| union(&left_nbr, s));
    side(g.n_right, &|s| union(&right_nbr, s));
    c
}
