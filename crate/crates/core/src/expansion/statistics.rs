use std::sync::Arc;

use serde::Serialize;

use crate::group::GeneratorSet;
use crate::numeric::{format_q, Q};
use crate::par::{self, Exec};
use crate::space::{SampledSet, SpaceModel};
use crate::{Error, Result};

/// Transition fractions of `(x, g)` uniform on `Ω × Q`: `p10` is the chance
/// that `x ∈ Y` and `g.x ∉ Y`, and so on.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeStatistics {
    pub m: f64,
    pub p11: f64,
    pub p00: f64,
    pub p10: f64,
    pub p01: f64,
    pub n11: u64,
    pub n00: u64,
    pub n10: u64,
    pub n01: u64,
    pub pairs: u64,
    pub points: u64,
    pub members: u64,
}

impl EdgeStatistics {
    pub fn p10_exact(&self) -> Q {
        Q::new(self.n10 as i128, self.pairs as i128)
    }

    pub fn m_exact(&self) -> Q {
        Q::new(self.members as i128, self.points as i128)
    }

    /// `p11 + p00 + 2 p10 = 1` and `p10 = p01`, in exact counts.
    pub fn identities_hold(&self) -> bool {
        self.n10 == self.n01 && self.n11 + self.n00 + 2 * self.n10 == self.pairs
    }

    /// `p10 >= c m (1 - m)`; the product is formed from exact `m`.
    pub fn satisfies(&self, c: f64) -> bool {
        let m = self.m_exact();
        let mm = m * (Q::from_integer(1) - m);
        let rhs = c * crate::numeric::q_to_f64(&mm);
        crate::numeric::q_to_f64(&self.p10_exact()) >= rhs - 1e-14
    }

    pub fn describe(&self) -> String {
        format!("m = {}, p10 = {}", format_q(&self.m_exact()), format_q(&self.p10_exact()))
    }
}

pub fn edge_statistics(model: &Arc<SpaceModel>, q: &GeneratorSet, y: &SampledSet) -> Result<EdgeStatistics> {
    if !model.supports_transport() {
        return Err(Error::NotExact("edge statistics need an exact model".into()));
    }
    let maps = q.elements().map(|g| model.transport(g)).collect::<Result<Vec<_>>>()?;
    if maps.iter().any(|m| !m.is_total()) {
        return Err(Error::NotExact("model is not closed under the generators".into()));
    }
    let n = model.len();
    let counts = par::map_chunks(Exec::Parallel, n, par::CHUNK, |r| {
        let mut c = [0u64; 4];
        for x in r {
            let a = y.mask[x] as usize;
            for m in &maps {
                let b = y.mask[m.image[x] as usize] as usize;
                c[a * 2 + b] += 1;
            }
        }
        c
    })
    .into_iter()
    .fold([0u64; 4], |acc, c| [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2], acc[3] + c[3]]);
    let pairs = (n * maps.len()) as u64;
    let f = |k: u64| k as f64 / pairs as f64;
    let members = y.count() as u64;
    Ok(EdgeStatistics {
        m: members as f64 / n as f64,
        p11: f(counts[3]),
        p00: f(counts[0]),
        p10: f(counts[2]),
        p01: f(counts[1]),
        n11: counts[3],
        n00: counts[0],
        n10: counts[2],
        n01: counts[1],
        pairs,
        points: n as u64,
        members,
    })
}

/// Certified lower bound `p10/|Q|` on the one-step growth `mu(Q.Y \ Y)`.
pub fn boundary_lower_bound(stats: &EdgeStatistics, q_size: usize) -> f64 {
    stats.p10 / q_size as f64
}

/// Direct `mu(Q.Y \ Y)`.
pub fn boundary_measure(model: &Arc<SpaceModel>, q: &GeneratorSet, y: &SampledSet) -> Result<f64> {
    let mut grown = vec![false; model.len()];
    for g in q.elements() {
        let map = model.transport(g)?;
        for x in y.ids() {
            if let Some(z) = map.get(x) {
                grown[z] = true;
            }
        }
    }
    let count = grown.iter().zip(&y.mask).filter(|(&g, &inside)| g && !inside).count();
    Ok(count as f64 * model.weight)
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthStep {
    pub step: u64,
    pub measure: f64,
    pub certified: f64,
}

/// Iterates `Y_{k+1} = Y_k ∪ Q.Y_k` and pairs each `mu(Y_k)` with the bound
/// `min(1 - η, mu(Y)(1 + cη/|Q|)^k)` that the one-step estimate certifies.
pub fn growth_chain(
    model: &Arc<SpaceModel>,
    q: &GeneratorSet,
    y: &SampledSet,
    c: f64,
    eta: f64,
    steps: u64,
) -> Result<Vec<GrowthStep>> {
    let maps = q.elements().map(|g| model.transport(g)).collect::<Result<Vec<_>>>()?;
    let factor = 1.0 + c * eta / q.len() as f64;
    let m0 = y.measure().value;
    let mut cur = y.mask.clone();
    let mut out = Vec::new();
    for k in 0..=steps {
        let measure = cur.iter().filter(|&&b| b).count() as f64 * model.weight;
        out.push(GrowthStep { step: k, measure, certified: (1.0 - eta).min(m0 * factor.powi(k as i32)) });
        let mut next = cur.clone();
        for m in &maps {
            for (x, &b) in cur.iter().enumerate() {
                if b {
                    if let Some(z) = m.get(x) {
                        next[z] = true;
                    }
                }
            }
        }
        cur = next;
    }
    Ok(out)
}
