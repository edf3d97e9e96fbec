use std::collections::VecDeque;
use std::time::Instant;

use serde::Serialize;

use crate::graphing::{Graphing, Vertex};
use crate::space::NONE;

const INF: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Matching {
    /// Matched edge id per left vertex, or `NONE`.
    pub mate_left: Vec<u32>,
    pub mate_right: Vec<u32>,
    pub stage: u32,
    /// No augmenting path of any length exists.
    pub maximum: bool,
}

impl Matching {
    pub fn empty(g: &Graphing) -> Matching {
        Matching { mate_left: vec![NONE; g.n_left], mate_right: vec![NONE; g.n_right], stage: 0, maximum: false }
    }

    pub fn size(&self) -> usize {
        self.mate_left.iter().filter(|&&k| k != NONE).count()
    }

    pub fn matched_edges(&self) -> Vec<u32> {
        self.mate_left.iter().copied().filter(|&k| k != NONE).collect()
    }

    pub fn unmatched_left(&self) -> usize {
        self.mate_left.len() - self.size()
    }

    pub fn unmatched_right(&self) -> usize {
        self.mate_right.iter().filter(|&&k| k == NONE).count()
    }

    pub fn is_perfect(&self) -> bool {
        self.unmatched_left() == 0 && self.unmatched_right() == 0
    }

    /// Every vertex meets at most one matched edge and the two mate tables agree.
    pub fn is_valid(&self, g: &Graphing) -> bool {
        let mut right_seen = vec![false; g.n_right];
        for (u, &k) in self.mate_left.iter().enumerate() {
            if k == NONE {
                continue;
            }
            let Some(e) = g.edges.get(k as usize) else { return false };
            if e.left as usize != u || right_seen[e.right as usize] || self.mate_right[e.right as usize] != k {
                return false;
            }
            right_seen[e.right as usize] = true;
        }
        self.mate_right.iter().enumerate().all(|(v, &k)| (k == NONE) != right_seen[v])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub stage: u32,
    pub phases: u32,
    pub augmenting_paths: u64,
    /// Shortest augmenting length found in each phase.
    pub path_lengths: Vec<u32>,
    pub unmatched_left_before: f64,
    pub unmatched_right_before: f64,
    pub unmatched_left_mass: f64,
    pub unmatched_right_mass: f64,
    pub flipped_edges: u64,
    pub flipped_edge_mass: f64,
    /// `(2·stage − 1)·μ(unmatched before)`, the ceiling on flipped mass.
    pub flip_bound: f64,
    pub elapsed_ms: f64,
}

/// Layered BFS from free left vertices. Returns per-left distances and the
/// shortest augmenting length `<= max_len`, if any.
fn layer(g: &Graphing, m: &Matching, max_len: u32) -> (Vec<u32>, Option<u32>) {
    let mut dist = vec![INF; g.n_left];
    let mut queue = VecDeque::new();
    for u in 0..g.n_left {
        if m.mate_left[u] == NONE {
            dist[u] = 0;
            queue.push_back(u);
        }
    }
    let mut shortest = INF;
    while let Some(u) = queue.pop_front() {
        let len = 2 * dist[u] + 1;
        if len > max_len || len > shortest {
            continue;
        }
        for k in g.left_edges(u) {
            let w = m.mate_right[g.edges[k].right as usize];
            if w == NONE {
                shortest = shortest.min(len);
            } else {
                let lw = g.edges[w as usize].left as usize;
                if dist[lw] == INF {
                    dist[lw] = dist[u] + 1;
                    queue.push_back(lw);
                }
            }
        }
    }
    (dist, (shortest != INF).then_some(shortest))
}

/// Flips a maximal vertex-disjoint family of augmenting paths of length
/// `shortest`; returns (paths, flipped edges).
fn flip_family(g: &Graphing, m: &mut Matching, dist: &mut [u32], shortest: u32) -> (u64, u64) {
    let mut cursor: Vec<usize> = (0..g.n_left).map(|u| g.left_edges(u).start).collect();
    let (mut paths, mut flipped) = (0u64, 0u64);
    for root in 0..g.n_left {
        if dist[root] != 0 || m.mate_left[root] != NONE {
            continue;
        }
        let mut stack = vec![root];
        let mut via: Vec<usize> = Vec::new();
        let mut found = false;
        while let Some(&u) = stack.last() {
            let end = g.left_edges(u).end;
            let mut advanced = false;
            while cursor[u] < end {
                let k = cursor[u];
                cursor[u] += 1;
                let w = m.mate_right[g.edges[k].right as usize];
                if w == NONE {
                    if 2 * dist[u] + 1 == shortest {
                        via.push(k);
                        found = true;
                        break;
                    }
                } else {
                    let lw = g.edges[w as usize].left as usize;
                    if dist[lw] != INF && dist[lw] == dist[u] + 1 {
                        via.push(k);
                        stack.push(lw);
                        advanced = true;
                        break;
                    }
                }
            }
            if found {
                break;
            }
            if !advanced {
                dist[u] = INF;
                stack.pop();
                via.pop();
            }
        }
        if found {
            for &k in &via {
                let e = g.edges[k];
                m.mate_left[e.left as usize] = k as u32;
                m.mate_right[e.right as usize] = k as u32;
            }
            for &u in &stack {
                dist[u] = INF;
            }
            paths += 1;
            flipped += 2 * via.len() as u64 - 1;
        }
    }
    (paths, flipped)
}

/// Advances `m` by one stage.
pub fn advance_stage(g: &Graphing, m: &Matching) -> (Matching, StageReport) {
    let start = Instant::now();
    let mut next = m.clone();
    next.stage = m.stage + 1;
    let max_len = 2 * next.stage - 1;
    let w = g.weight;
    let (ul, ur) = (m.unmatched_left() as f64 * w, m.unmatched_right() as f64 * w);
    let mut report = StageReport {
        stage: next.stage,
        phases: 0,
        augmenting_paths: 0,
        path_lengths: Vec::new(),
        unmatched_left_before: ul,
        unmatched_right_before: ur,
        unmatched_left_mass: 0.0,
        unmatched_right_mass: 0.0,
        flipped_edges: 0,
        flipped_edge_mass: 0.0,
        flip_bound: (2 * next.stage - 1) as f64 * (ul + ur),
        elapsed_ms: 0.0,
    };
    if !m.maximum {
        loop {
            let (mut dist, shortest) = layer(g, &next, max_len);
            let Some(len) = shortest else { break };
            let (paths, flipped) = flip_family(g, &mut next, &mut dist, len);
            report.phases += 1;
            report.path_lengths.push(len);
            report.augmenting_paths += paths;
            report.flipped_edges += flipped;
        }
        next.maximum = layer(g, &next, u32::MAX - 1).1.is_none();
    }
    report.flipped_edge_mass = report.flipped_edges as f64 * w;
    report.unmatched_left_mass = next.unmatched_left() as f64 * w;
    report.unmatched_right_mass = next.unmatched_right() as f64 * w;
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    (next, report)
}

/// Runs stages `1..=k` from the empty matching.
pub fn run_to_stage(g: &Graphing, k: u32) -> (Matching, Vec<StageReport>) {
    let mut m = Matching::empty(g);
    let mut reports = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let (next, r) = advance_stage(g, &m);
        m = next;
        reports.push(r);
    }
    (m, reports)
}

/// Runs stages until the matching is maximum or `cap` stages are done.
pub fn run_until_stable(g: &Graphing, cap: u32) -> (Matching, Vec<StageReport>) {
    let mut m = Matching::empty(g);
    let mut reports = Vec::new();
    while m.stage < cap && !m.maximum {
        let (next, r) = advance_stage(g, &m);
        m = next;
        reports.push(r);
    }
    (m, reports)
}

#[derive(Clone, Debug, Serialize)]
pub struct AugmentingPath {
    /// Edge ids, alternating unmatched / matched, starting at a free left vertex.
    pub edges: Vec<u32>,
    pub vertices: Vec<Vertex>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AugmentCheck {
    pub ok: bool,
    pub witness: Option<AugmentingPath>,
}

/// Searches for an augmenting path of length `<= max_len`; `ok` means none exists.
pub fn verify_no_short_augmenting_path(g: &Graphing, m: &Matching, max_len: usize) -> AugmentCheck {
    let mut dist = vec![INF; g.n_left];
    let mut parent = vec![NONE; g.n_left];
    let mut queue = VecDeque::new();
    for u in 0..g.n_left {
        if m.mate_left[u] == NONE {
            dist[u] = 0;
            queue.push_back(u);
        }
    }
    while let Some(u) = queue.pop_front() {
        if 2 * dist[u] as usize + 1 > max_len {
            continue;
        }
        for k in g.left_edges(u) {
            if m.mate_left[u] == k as u32 {
                continue;
            }
            let w = m.mate_right[g.edges[k].right as usize];
            if w == NONE {
                let mut edges = vec![k as u32];
                let mut x = u;
                while dist[x] != 0 {
                    edges.push(m.mate_left[x]);
                    edges.push(parent[x]);
                    x = g.edges[parent[x] as usize].left as usize;
                }
                edges.reverse();
                let mut vertices = vec![Vertex::Left(g.edges[edges[0] as usize].left)];
                for (i, &e) in edges.iter().enumerate() {
                    let e = g.edges[e as usize];
                    vertices.push(if i % 2 == 0 { Vertex::Right(e.right) } else { Vertex::Left(e.left) });
                }
                return AugmentCheck { ok: false, witness: Some(AugmentingPath { edges, vertices }) };
            }
            let lw = g.edges[w as usize].left as usize;
            if dist[lw] == INF {
                dist[lw] = dist[u] + 1;
                parent[lw] = k as u32;
                queue.push_back(lw);
            }
        }
    }
    AugmentCheck { ok: true, witness: None }
}

/// Checks that a witness is a genuine augmenting path for `m`.
pub fn is_augmenting_path(g: &Graphing, m: &Matching, p: &AugmentingPath) -> bool {
    let Some(&first) = p.edges.first() else { return false };
    let Some(&last) = p.edges.last() else { return false };
    if p.edges.len() % 2 == 0
        || m.mate_left[g.edges[first as usize].left as usize] != NONE
        || m.mate_right[g.edges[last as usize].right as usize] != NONE
    {
        return false;
    }
    p.edges.windows(2).enumerate().all(|(i, w)| {
        let (a, b) = (g.edges[w[0] as usize], g.edges[w[1] as usize]);
        let matched_ok = if i % 2 == 0 { m.mate_right[a.right as usize] == w[1] } else { m.mate_left[b.left as usize] != w[1] };
        let joined = if i % 2 == 0 { a.right == b.right } else { a.left == b.left };
        matched_ok && joined
    })
}
