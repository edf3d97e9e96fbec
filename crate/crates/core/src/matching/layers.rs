use std::collections::VecDeque;

use crate::graphing::Graphing;
use crate::space::NONE;

use super::Matching;

const INF: u32 = u32::MAX;

/// Alternating distances from the free vertices of one side: free vertices sit
/// at 0, unmatched edges lead out of the starting side and matched edges lead
/// back. `X_j` is the set of vertices at distance `<= j`.
#[derive(Clone, Debug)]
pub struct AlternatingLayers {
    pub dist_left: Vec<u32>,
    pub dist_right: Vec<u32>,
}

impl AlternatingLayers {
    pub fn from_left(g: &Graphing, m: &Matching) -> Self {
        let mut dl = vec![INF; g.n_left];
        let mut dr = vec![INF; g.n_right];
        let mut queue = VecDeque::new();
        for u in 0..g.n_left {
            if m.mate_left[u] == NONE {
                dl[u] = 0;
                queue.push_back(u);
            }
        }
        while let Some(u) = queue.pop_front() {
            for k in g.left_edges(u) {
                if m.mate_left[u] == k as u32 {
                    continue;
                }
                let v = g.edges[k].right as usize;
                if dr[v] == INF {
                    dr[v] = dl[u] + 1;
                    let w = m.mate_right[v];
                    if w != NONE {
                        let lw = g.edges[w as usize].left as usize;
                        if dl[lw] == INF {
                            dl[lw] = dr[v] + 1;
                            queue.push_back(lw);
                        }
                    }
                }
            }
        }
        AlternatingLayers { dist_left: dl, dist_right: dr }
    }

    pub fn from_right(g: &Graphing, m: &Matching) -> Self {
        let mut dl = vec![INF; g.n_left];
        let mut dr = vec![INF; g.n_right];
        let mut queue = VecDeque::new();
        for v in 0..g.n_right {
            if m.mate_right[v] == NONE {
                dr[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            for k in g.right_edges(v) {
                if m.mate_right[v] == k as u32 {
                    continue;
                }
                let u = g.edges[k].left as usize;
                if dl[u] == INF {
                    dl[u] = dr[v] + 1;
                    let w = m.mate_left[u];
                    if w != NONE {
                        let rw = g.edges[w as usize].right as usize;
                        if dr[rw] == INF {
                            dr[rw] = dl[u] + 1;
                            queue.push_back(rw);
                        }
                    }
                }
            }
        }
        AlternatingLayers { dist_left: dl, dist_right: dr }
    }

    /// Membership masks of `X_j` on both sides.
    pub fn layer(&self, j: u32) -> (Vec<bool>, Vec<bool>) {
        (
            self.dist_left.iter().map(|&d| d <= j).collect(),
            self.dist_right.iter().map(|&d| d <= j).collect(),
        )
    }

    pub fn counts(&self, j: u32) -> (usize, usize) {
        (
            self.dist_left.iter().filter(|&&d| d <= j).count(),
            self.dist_right.iter().filter(|&&d| d <= j).count(),
        )
    }
}
