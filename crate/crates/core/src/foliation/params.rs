use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::expansion::minimal_word_length;
use crate::group::{GeneratorSet, GroupElement};
use crate::{Error, Result};

/// Left side of the diffuser constraint `δ|T|M/(D-δ) <= ε`.
pub fn delta_constraint(delta: f64, d: f64, m: f64, t_size: usize) -> f64 {
    delta * t_size as f64 * m / (d - delta)
}

/// A `δ ∈ (0, D)` with `δ|T|M/(D-δ) <= ε`: the closed form `ε/(4M)` when
/// `D = 1/2` and `|T| = 1`, otherwise the largest feasible `εD/(|T|M + ε)`.
pub fn solve_delta(d: f64, m: f64, t_size: usize, eps: f64) -> Result<f64> {
    if !(d > 0.0 && d < 1.0 + f64::EPSILON) || !(eps > 0.0 && eps < 1.0) || !(m > 0.0) || t_size == 0 {
        return Err(Error::Infeasible(format!("D={d}, M={m}, |T|={t_size}, ε={eps} out of range")));
    }
    let mut delta = if d == 0.5 && t_size == 1 { eps / (4.0 * m) } else { eps * d / (t_size as f64 * m + eps) };
    // the closed forms may overshoot by an ulp
    while delta > 0.0 && delta_constraint(delta, d, m, t_size) > eps {
        delta = f64::from_bits(delta.to_bits() - 1);
    }
    if !(delta > 0.0 && delta < d) {
        return Err(Error::Infeasible(format!("no δ in (0, {d}) for ε={eps}")));
    }
    Ok(delta)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComposedParams {
    pub eta: f64,
    pub m: f64,
    pub eps: f64,
    pub delta: f64,
    /// `δε/(2M)`, as defined from the other two.
    pub beta: f64,
    /// `η/(12M³)`, the closed form quoted for `δ`.
    pub delta_stated: f64,
    /// `η²/(36M⁵)`, the closed form quoted for `β`.
    pub beta_stated: f64,
}

/// `ε = η/(3M²)`, `δ` from [`solve_delta`] with the cube diffuser (`D = 1/2`,
/// `|T| = 1`), and `β = δε/(2M)`.
pub fn composed_expander_params(eta: f64, m: f64) -> Result<ComposedParams> {
    composed_params_with(eta, m, 0.5, 1)
}

pub fn composed_params_with(eta: f64, m: f64, d: f64, t_size: usize) -> Result<ComposedParams> {
    if !(eta > 0.0 && eta < 1.0) || m < 1.0 {
        return Err(Error::Infeasible(format!("η={eta}, M={m} out of range")));
    }
    let eps = eta / (3.0 * m * m);
    let delta = solve_delta(d, m, t_size, eps)?;
    Ok(ComposedParams {
        eta,
        m,
        eps,
        delta,
        beta: delta * eps / (2.0 * m),
        delta_stated: eta / (12.0 * m.powi(3)),
        beta_stated: eta * eta / (36.0 * m.powi(5)),
    })
}

/// Size of the set of products of exactly `l` rotation generators from the
/// six-element free generating set, in `log_5`.
pub fn lps_product_count_log5(l: u64) -> f64 {
    let l = l as f64;
    if l == 0.0 {
        0.0
    } else if l % 2.0 == 0.0 {
        // 1 + (5/4)(5^l - 1)
        l + (1.25f64).ln() / 5f64.ln() + (1.0 - 0.2 * 5f64.powf(-l)).ln() / 5f64.ln()
    } else {
        // (5^{l+1} - 1)/4
        l + 1.0 - 4f64.ln() / 5f64.ln() + (1.0 - 5f64.powf(-(l + 1.0))).ln() / 5f64.ln()
    }
}

/// Averaging-operator gap of the six rotation generators on the sphere.
pub fn lps_gap() -> f64 {
    1.0 - 5f64.sqrt() / 3.0
}

#[derive(Clone, Debug, Serialize)]
pub struct WordSetSpec {
    pub name: String,
    pub eta: f64,
    pub l: u64,
    pub size_log5: f64,
}

impl WordSetSpec {
    fn lps(name: &str, eta: f64) -> Result<WordSetSpec> {
        let l = minimal_word_length(lps_gap(), eta, 6)?;
        Ok(WordSetSpec { name: name.into(), eta, l, size_log5: lps_product_count_log5(l) })
    }
}

/// Symbolic `R = S_β T S_δ ∪ S_β T ∪ S_δ`.
#[derive(Clone, Debug, Serialize)]
pub struct ExpanderRecipe {
    pub params: ComposedParams,
    pub s_beta: WordSetSpec,
    pub s_delta: WordSetSpec,
    pub diffuser: Vec<GroupElement>,
    pub terms: Vec<String>,
    /// `log_5(|S_β||T||S_δ| + |S_β||T| + |S_δ|)`, before deduplication.
    pub size_log5: f64,
}

fn log5_sum(terms: &[f64]) -> f64 {
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| 5f64.powf(t - top)).sum::<f64>().ln() / 5f64.ln()
}

fn recipe(params: ComposedParams, diffuser: Vec<GroupElement>) -> Result<ExpanderRecipe> {
    let s_beta = WordSetSpec::lps("S_beta", params.beta)?;
    let s_delta = WordSetSpec::lps("S_delta", params.delta)?;
    let t = (diffuser.len() as f64).ln() / 5f64.ln();
    let size_log5 = log5_sum(&[s_beta.size_log5 + t + s_delta.size_log5, s_beta.size_log5 + t, s_delta.size_log5]);
    Ok(ExpanderRecipe {
        params,
        s_beta,
        s_delta,
        diffuser,
        terms: vec!["S_beta T S_delta".into(), "S_beta T".into(), "S_delta".into()],
        size_log5,
    })
}

/// Recipe for the annulus with the cube diffuser `{f}` and `M = 4πρ²`.
pub fn annulus_expander(eta: f64) -> Result<ExpanderRecipe> {
    let m = super::Foliation::annulus(1)?.m_bound;
    recipe(composed_expander_params(eta, m)?, vec![super::construct_cube().f])
}

/// Recipe for a unit cube foliated by its last coordinate (`M = 1`), whose
/// diffuser is the single quarter turn with constant `D = 1`.
pub fn cube_stacking_expander(eta: f64) -> Result<ExpanderRecipe> {
    recipe(composed_params_with(eta, 1.0, 1.0, 1)?, vec![super::quarter_turn()])
}

impl ExpanderRecipe {
    /// Expands the recipe from concrete leaf-wise sets, refusing beyond `cap`.
    pub fn enumerate(&self, s_beta: &GeneratorSet, s_delta: &GeneratorSet, cap: usize) -> Result<GeneratorSet> {
        if self.size_log5 > (cap as f64).ln() / 5f64.ln() {
            return Err(Error::SizeCap { what: "composed expanding set".into(), cap });
        }
        let mut t = GeneratorSet::empty(s_beta.kind, s_beta.dim);
        for g in &self.diffuser {
            t = t.union(&GeneratorSet::from_alphabet(vec![crate::group::NamedGenerator { name: "f".into(), element: g.clone() }], false)?)?;
        }
        let bt = s_beta.product(&t, cap)?;
        bt.product(s_delta, cap)?.union(&bt)?.union(s_delta)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransversalReport {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub trials: usize,
    pub min_good_fraction: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Discretized diffuser-transversal check on the `n³` cell grid of the unit
/// cube with the quarter turn: for `V` filling each supported layer to at
/// least `1 - δ`, the layers with `μ_z(T.V) > δ μ(V)` have mass `> 1 - ε`.
/// Half the trials use the adversarial `V` that removes whole rows.
pub fn transversal_check(n: usize, eps: f64, trials: usize, seed: u64) -> Result<TransversalReport> {
    let delta = solve_delta(1.0, 1.0, 1, eps)?;
    let per_layer = n * n;
    let removable = (delta * per_layer as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_good = 1.0f64;
    for trial in 0..trials {
        let layers: Vec<usize> = loop {
            let l: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            if !l.is_empty() {
                break l;
            }
        };
        // v[x1][x2][x3] flattened as x3 * n² + x2 * n + x1
        let mut v = vec![false; n * per_layer];
        let rows = (removable / n).min(n);
        let skip_rows: Vec<usize> = sample(&mut rng, n, rows).into_vec();
        for &z in &layers {
            let base = z * per_layer;
            if trial % 2 == 0 {
                for cell in 0..per_layer {
                    v[base + cell] = !skip_rows.contains(&(cell / n));
                }
            } else {
                v[base..base + per_layer].iter_mut().for_each(|c| *c = true);
                let k = rng.random_range(0..=removable);
                for cell in sample(&mut rng, per_layer, k) {
                    v[base + cell] = false;
                }
            }
        }
        let mu_v = v.iter().filter(|&&b| b).count() as f64 / (n * per_layer) as f64;
        // (x1, x2, x3) -> (x1, n-1-x3, x2) on cell indices
        let mut layer_mass = vec![0usize; n];
        for (idx, &inside) in v.iter().enumerate() {
            if inside {
                let x2 = (idx / n) % n;
                layer_mass[x2] += 1;
            }
        }
        let good = layer_mass.iter().filter(|&&c| c as f64 / per_layer as f64 > delta * mu_v).count();
        min_good = min_good.min(good as f64 / n as f64);
    }
    Ok(TransversalReport {
        n,
        eps,
        delta,
        trials,
        min_good_fraction: min_good,
        threshold: 1.0 - eps,
        pass: min_good > 1.0 - eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_delta_is_feasible() {
        let m = 4.0 * std::f64::consts::PI * crate::numeric::RHO.powi(2);
        for eps in [0.5, 1e-3, 1e-9] {
            let d = solve_delta(0.5, m, 1, eps).unwrap();
            assert!(delta_constraint(d, 0.5, m, 1) <= eps);
            assert!((d - eps / (4.0 * m)).abs() <= 1e-15 * d.max(1e-300) * 4.0);
        }
    }

    #[test]
    fn general_delta_is_maximal() {
        let d = solve_delta(0.3, 2.0, 3, 0.1).unwrap();
        assert!(delta_constraint(d, 0.3, 2.0, 3) <= 0.1);
        assert!(delta_constraint(d * (1.0 + 1e-9), 0.3, 2.0, 3) > 0.1);
    }

    #[test]
    fn product_counts_match_small_cases() {
        for (l, count) in [(1u64, 6.0f64), (2, 31.0), (3, 156.0)] {
            assert!((lps_product_count_log5(l) - count.ln() / 5f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn transversal_rows_are_tight() {
        let r = transversal_check(24, 0.2, 20, 3).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
