use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expansion::{minimal_word_length, verify_expansion, ExpansionReport};
use crate::graphing::{bipartite_graphing, doubled_graphing, Graphing};
use crate::group::{lps_generators, sl2z_generators, word_products, GeneratorSet};
use crate::matching::{extract_equidecomposition, run_until_stable, StageReport};
use crate::space::{ModelSpec, SampledSet, SetPredicate, SpaceModel};
use crate::{Error, Result};

use super::reduce::check_cover;
use super::{validate_certificate, Certificate, ValidationReport};

/// Where the η-expanding set comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum GapSource {
    /// All words of length at most `radius`; expansion is established only by
    /// the empirical check on the test family.
    WordBall { generators: NamedGenerators, radius: usize },
    /// Products of exactly `l` generators with `l` chosen from a gap `c`.
    /// `trusted` marks a gap taken from the literature rather than computed.
    Spectral { generators: NamedGenerators, c: f64, trusted: bool },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum NamedGenerators {
    Sl2z,
    Lps,
}

impl NamedGenerators {
    pub fn set(self) -> GeneratorSet {
        match self {
            NamedGenerators::Sl2z => sl2z_generators(),
            NamedGenerators::Lps => lps_generators(),
        }
    }
}

impl GapSource {
    pub fn label(&self) -> String {
        match self {
            GapSource::WordBall { radius, .. } => format!("word ball of radius {radius} (empirical)"),
            GapSource::Spectral { c, trusted: true, .. } => format!("cited gap c = {c} (taken on trust)"),
            GapSource::Spectral { c, .. } => format!("computed gap c = {c}"),
        }
    }

    /// The symmetric expanding set with the identity adjoined.
    pub fn expanding_set(&self, eta: f64, cap: usize) -> Result<GeneratorSet> {
        let r = match self {
            GapSource::WordBall { generators, radius } => {
                let q = generators.set();
                let mut r = word_products(&q, *radius, cap)?;
                if *radius > 0 {
                    r = r.union(&word_products(&q, radius - 1, cap)?)?;
                }
                r
            }
            GapSource::Spectral { generators, c, .. } => {
                let q = generators.set();
                let l = minimal_word_length(*c, eta, q.len())?;
                word_products(&q, l as usize, cap)?
            }
        };
        r.symmetrized_with_identity()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquidecomposeConfig {
    pub model: ModelSpec,
    pub a: SetPredicate,
    pub b: SetPredicate,
    /// Covering set `T`, given as generator JSON.
    pub cover: GeneratorSet,
    pub gap: GapSource,
    /// `η` as a fraction of `min(1/6, 1/(2|T|))`.
    #[serde(default = "default_eta_fraction")]
    pub eta_fraction: f64,
    #[serde(default = "default_stage_cap")]
    pub stage_cap: u32,
    #[serde(default)]
    pub residue_threshold: Option<f64>,
    #[serde(default = "default_family_size")]
    pub family_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub size_cap: usize,
}

fn default_eta_fraction() -> f64 {
    0.9
}
fn default_stage_cap() -> u32 {
    64
}
fn default_family_size() -> usize {
    64
}
fn default_cap() -> usize {
    200_000
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidecomposeOutcome {
    pub eta: f64,
    pub gap_source: String,
    pub r_size: usize,
    pub s_size: usize,
    pub doubled: bool,
    pub expansion: ExpansionReport,
    pub stages: Vec<StageReport>,
    pub certificate: Certificate,
    pub validation: ValidationReport,
}

/// Random boxes of assorted sizes plus the sets themselves, for the empirical
/// expansion check.
pub fn test_family(model: &SpaceModel, extra: &[SetPredicate], size: usize, seed: u64) -> Vec<SetPredicate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = model.dim;
    let mut out: Vec<SetPredicate> = extra.to_vec();
    let (lo, hi): (Vec<f64>, Vec<f64>) = match &model.spec {
        ModelSpec::PlaneGrid { q, lo, hi } => (
            lo.iter().map(|&v| v as f64 / *q as f64).collect(),
            hi.iter().map(|&v| v as f64 / *q as f64).collect(),
        ),
        ModelSpec::CubeCloud { lo, hi, .. } => (lo.to_vec(), hi.to_vec()),
        _ if dim == 2 => (vec![0.0; 2], vec![1.0; 2]),
        _ => (vec![-crate::numeric::RHO; 3], vec![crate::numeric::RHO; 3]),
    };
    for _ in 0..size {
        let scale = 2f64.powf(-rng.random_range(0.0..5.0));
        let mut l = Vec::with_capacity(dim);
        let mut h = Vec::with_capacity(dim);
        for k in 0..dim {
            let w = (hi[k] - lo[k]) * scale;
            let s = rng.random_range(lo[k]..hi[k] - w * 0.999);
            l.push(s);
            h.push(s + w);
        }
        out.push(SetPredicate::rect(&l, &h));
    }
    out
}

/// Builds the graphing for `A → B` with labels `S`, on two copies when they meet.
pub fn disjointify(a: &SampledSet, b: &SampledSet, s: &GeneratorSet) -> Result<Graphing> {
    if a.is_disjoint(b) {
        bipartite_graphing(a, b, s)
    } else {
        doubled_graphing(a, b, s)
    }
}

pub fn equidecompose(model: &Arc<SpaceModel>, cfg: &EquidecomposeConfig) -> Result<EquidecomposeOutcome> {
    let a = SampledSet::from_predicate(model, &cfg.a)?;
    let b = SampledSet::from_predicate(model, &cfg.b)?;
    let (ma, mb) = (a.measure(), b.measure());
    let equal = match (ma.exact_q, mb.exact_q) {
        (Some(x), Some(y)) => x == y,
        _ => (ma.value - mb.value).abs() <= ma.radius + mb.radius,
    };
    if !equal {
        return Err(Error::MeasureMismatch { a: ma.value, b: mb.value });
    }
    if ma.is_zero() {
        return Err(Error::InvalidArgument("A has no mass on this model".into()));
    }
    let t = &cfg.cover;
    if !t.is_symmetric() || !t.contains_identity() {
        return Err(Error::InvalidArgument("the covering set must be symmetric and contain the identity".into()));
    }
    let c = a.union(&b)?;
    check_cover(model, t, &a, &c)?;
    check_cover(model, t, &b, &c)?;

    // measures renormalized so that mu(A) = 1/2
    let eta = cfg.eta_fraction * (1.0f64 / 6.0).min(1.0 / (2.0 * t.len() as f64));
    let r = cfg.gap.expanding_set(eta, cfg.size_cap)?;
    let family = test_family(model, &[cfg.a.clone(), cfg.b.clone()], cfg.family_size, cfg.seed);
    let expansion = verify_expansion(model, &c, &r, eta, &family)?;
    if let Some(row) = expansion.first_failure() {
        return Err(Error::ExpansionFails { set: row.set.clone(), lhs: row.lhs, rhs: row.rhs });
    }
    let s = t.product(&r, cfg.size_cap)?.union(&r.product(t, cfg.size_cap)?)?;
    let g = disjointify(&a, &b, &s)?;
    let doubled = g.origin.as_ref().is_some_and(|o| o.doubled);
    let (m, stages) = run_until_stable(&g, cfg.stage_cap);
    let threshold = cfg.residue_threshold.unwrap_or(if model.is_exact() { 0.0 } else { 1e-3 });
    let mut certificate = extract_equidecomposition(&g, &m, threshold)?;
    certificate.source = Some(cfg.a.clone());
    certificate.target = Some(cfg.b.clone());
    certificate.metadata.insert("gap_source".into(), cfg.gap.label());
    certificate.metadata.insert("eta".into(), eta.to_string());
    certificate
        .metadata
        .insert("covering".into(), "checked on model points; null-set refinements are not distinguishable".into());
    let validation = validate_certificate(&certificate, model, &a, &b);
    if !validation.ok {
        return Err(Error::Certificate(validation.failures.join("; ")));
    }
    Ok(EquidecomposeOutcome {
        eta,
        gap_source: cfg.gap.label(),
        r_size: r.len(),
        s_size: s.len(),
        doubled,
        expansion,
        stages,
        certificate,
        validation,
    })
}

impl EquidecomposeConfig {
    /// `A = [0, 1/2) × [0, 1)` against the quarter-cell checkerboard shifted by
    /// `(1/8, 1/8)` on the rational torus, covered by the four horizontal
    /// quarter translations. `q` must be a multiple of 8.
    pub fn torus_example(q: u64, radius: usize) -> Result<EquidecomposeConfig> {
        use crate::group::{torus_translation_set, GroupElement};
        use crate::numeric::{q as rat, qi};
        if q % 8 != 0 {
            return Err(Error::InvalidArgument(format!("q = {q} must be a multiple of 8")));
        }
        let cells = (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .filter(|(i, j)| (i + j) % 2 == 0)
            .map(|(i, j)| {
                let (x, y) = (i as f64 / 4.0, j as f64 / 4.0);
                SetPredicate::rect(&[x, y], &[x + 0.25, y + 0.25])
            })
            .collect();
        let shift = GroupElement::torus_translation([rat(1, 8), rat(1, 8)])?;
        let cover = torus_translation_set(&[[qi(0), qi(0)], [rat(1, 4), qi(0)], [rat(1, 2), qi(0)], [rat(3, 4), qi(0)]])?;
        Ok(EquidecomposeConfig {
            model: ModelSpec::RationalTorus { q, punctured: false },
            a: SetPredicate::rect(&[0.0, 0.0], &[0.5, 1.0]),
            b: SetPredicate::union(cells).image(&shift),
            cover,
            gap: GapSource::WordBall { generators: NamedGenerators::Sl2z, radius },
            eta_fraction: default_eta_fraction(),
            stage_cap: default_stage_cap(),
            residue_threshold: None,
            family_size: default_family_size(),
            seed: 0,
            size_cap: default_cap(),
        })
    }
}
