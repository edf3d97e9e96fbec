use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::group::{ElementIndex, GeneratorSet, GroupElement, NamedGenerator, Word, GENERATORS_SCHEMA};
use crate::numeric::{format_q, Q};
use crate::space::{ModelSpec, SampledSet, SetPredicate, SpaceModel};
use crate::{Error, Result};

pub const CERTIFICATE_SCHEMA: &str = "equidecomp.certificate/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    Exact,
    Statistical,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Piece {
    pub motion: Word,
    pub motion_text: String,
    pub element: GroupElement,
    /// Model point ids (exact models).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<SetPredicate>,
    pub mass: f64,
}

/// Pieces `A_i` with motions `g_i` such that the `A_i` partition the source
/// minus `residue_source` and the `g_i.A_i` partition the target minus
/// `residue_target`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub mode: ValidationMode,
    pub model: ModelSpec,
    pub alphabet: Vec<NamedGenerator>,
    #[serde(default)]
    pub source: Option<SetPredicate>,
    #[serde(default)]
    pub target: Option<SetPredicate>,
    pub source_mass: f64,
    pub target_mass: f64,
    pub pieces: Vec<Piece>,
    pub residue_source: Vec<u32>,
    pub residue_target: Vec<u32>,
    pub residue_mass: f64,
    #[serde(default)]
    pub stage: Option<u32>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Certificate {
    pub fn new(mode: ValidationMode, model: &SpaceModel, alphabet: Vec<NamedGenerator>) -> Self {
        Certificate {
            schema: CERTIFICATE_SCHEMA.into(),
            mode,
            model: model.spec.clone(),
            alphabet,
            source: None,
            target: None,
            source_mass: 0.0,
            target_mass: 0.0,
            pieces: Vec::new(),
            residue_source: Vec::new(),
            residue_target: Vec::new(),
            residue_mass: 0.0,
            stage: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Certificate> {
        let c: Certificate = serde_json::from_str(s)?;
        if c.schema != CERTIFICATE_SCHEMA {
            return Err(Error::InvalidArgument(format!("unknown schema {:?}", c.schema)));
        }
        Ok(c)
    }

    fn replay(&self, w: &Word) -> Result<GroupElement> {
        let first = self
            .alphabet
            .first()
            .map(|g| (g.element.kind, g.element.dim))
            .or_else(|| self.pieces.first().map(|p| (p.element.kind, p.element.dim)))
            .ok_or_else(|| Error::Certificate("empty certificate has no alphabet".into()))?;
        let mut s = GeneratorSet::empty(first.0, first.1);
        s.schema = GENERATORS_SCHEMA.into();
        s.alphabet = self.alphabet.clone();
        s.evaluate(w)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub mode: ValidationMode,
    pub pieces: usize,
    pub source_points: usize,
    pub target_points: usize,
    /// `mu(A) - mu(residue)` and `mu(B) - mu(image residue)` as exact fractions.
    pub source_covered: Option<String>,
    pub target_covered: Option<String>,
    pub failures: Vec<String>,
}

/// Re-checks a certificate point by point, independently of how it was built:
/// motions are replayed from their words and images are computed in exact
/// rational arithmetic, not through the model's index tables.
pub fn validate_certificate(cert: &Certificate, model: &Arc<SpaceModel>, a: &SampledSet, b: &SampledSet) -> ValidationReport {
    let mut fails = Vec::new();
    let n = model.len();
    let mut report = ValidationReport {
        ok: false,
        mode: cert.mode,
        pieces: cert.pieces.len(),
        source_points: a.count(),
        target_points: b.count(),
        source_covered: None,
        target_covered: None,
        failures: Vec::new(),
    };
    if cert.model != model.spec {
        fails.push("certificate was built on a different model".to_string());
    }
    if cert.mode != ValidationMode::Exact || !model.is_exact() {
        fails.push("exact validation needs an exact model and exact-mode certificate".into());
        report.failures = fails;
        return report;
    }
    let mut src = vec![0u8; n];
    let mut dst = vec![0u8; n];
    for (i, p) in cert.pieces.iter().enumerate() {
        match cert.replay(&p.motion) {
            Ok(g) if g.equals(&p.element) => {}
            Ok(_) => fails.push(format!("piece {i}: word {} does not evaluate to the stored motion", p.motion_text)),
            Err(e) => fails.push(format!("piece {i}: {e}")),
        }
        let Some(points) = &p.points else {
            fails.push(format!("piece {i} has no point list"));
            continue;
        };
        for &x in points {
            let x = x as usize;
            if x >= n {
                fails.push(format!("piece {i}: point id {x} out of range"));
                continue;
            }
            src[x] += 1;
            let y = model
                .exact_point(x)
                .and_then(|px| p.element.apply_exact(&px).ok())
                .and_then(|py| model.index_of_exact(&py));
            match y {
                Some(y) => dst[y] += 1,
                None => fails.push(format!("piece {i}: image of point {x} leaves the model")),
            }
        }
    }
    for &x in &cert.residue_source {
        if let Some(c) = src.get_mut(x as usize) {
            *c += 1;
        }
    }
    for &y in &cert.residue_target {
        if let Some(c) = dst.get_mut(y as usize) {
            *c += 1;
        }
    }
    let bad_src = (0..n).filter(|&x| src[x] != a.mask[x] as u8).count();
    let bad_dst = (0..n).filter(|&y| dst[y] != b.mask[y] as u8).count();
    if bad_src > 0 {
        fails.push(format!("{bad_src} source points are uncovered, doubly covered or outside A"));
    }
    if bad_dst > 0 {
        fails.push(format!("{bad_dst} target points are uncovered, doubly covered or outside B"));
    }
    if cert.residue_source.len() != cert.residue_target.len() {
        fails.push("residues on the two sides differ in size".into());
    }
    if let Some(w) = model.exact_weight {
        let cov = |total: usize, res: usize| w * Q::from_integer(total as i128 - res as i128);
        let sc = cov(report.source_points, cert.residue_source.len());
        let tc = cov(report.target_points, cert.residue_target.len());
        if sc != tc {
            fails.push(format!("covered masses differ: {} vs {}", format_q(&sc), format_q(&tc)));
        }
        report.source_covered = Some(format_q(&sc));
        report.target_covered = Some(format_q(&tc));
        if !cert.residue_source.is_empty() && (w * Q::from_integer(cert.residue_source.len() as i128)).is_zero() {
            fails.push("residue bookkeeping inconsistent".into());
        }
    }
    report.ok = fails.is_empty();
    report.failures = fails;
    report
}

/// Composes `A -> B` with `B -> C` into `A -> C`. Pieces are the nonempty
/// `A_i ∩ g_i^-1.B_j` moved by `h_j g_i`, so the count is at most the product.
pub fn chain_certificates(first: &Certificate, second: &Certificate, model: &Arc<SpaceModel>) -> Result<Certificate> {
    if first.model != second.model || first.model != model.spec {
        return Err(Error::IncompatibleModel);
    }
    let n = model.len();
    let mut second_piece = vec![u32::MAX; n];
    for (j, p) in second.pieces.iter().enumerate() {
        for &y in p.points.as_deref().unwrap_or(&[]) {
            second_piece[y as usize] = j as u32;
        }
    }
    // merge alphabets
    let mut alphabet = first.alphabet.clone();
    let remap: Vec<usize> = second
        .alphabet
        .iter()
        .map(|g| match alphabet.iter().position(|h| h.name == g.name && h.element.equals(&g.element)) {
            Some(i) => i,
            None => {
                alphabet.push(g.clone());
                alphabet.len() - 1
            }
        })
        .collect();
    let mut buckets: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
    let mut residue_source = first.residue_source.clone();
    let mut residue_target = second.residue_target.clone();
    let image = |g: &GroupElement, x: u32| -> Result<usize> {
        model
            .exact_point(x as usize)
            .and_then(|p| g.apply_exact(&p).ok())
            .and_then(|p| model.index_of_exact(&p))
            .ok_or_else(|| Error::Certificate(format!("image of point {x} leaves the model")))
    };
    for (i, p) in first.pieces.iter().enumerate() {
        for &x in p.points.as_deref().unwrap_or(&[]) {
            let y = image(&p.element, x)?;
            match second_piece[y] {
                u32::MAX => residue_source.push(x),
                j => buckets.entry((i, j as usize)).or_default().push(x),
            }
        }
    }
    for &y in &first.residue_target {
        let j = second_piece[y as usize];
        if j != u32::MAX {
            residue_target.push(image(&second.pieces[j as usize].element, y)? as u32);
        }
    }
    let mut idx = ElementIndex::new();
    let mut pieces: Vec<Piece> = Vec::new();
    for ((i, j), points) in buckets {
        let (p, q) = (&first.pieces[i], &second.pieces[j]);
        let qword = Word {
            letters: q
                .motion
                .letters
                .iter()
                .map(|l| crate::group::Letter { generator: remap[l.generator], inverse: l.inverse })
                .collect(),
        };
        let motion = qword.concat(&p.motion);
        let element = q.element.compose(&p.element)?;
        let names: Vec<NamedGenerator> = alphabet.clone();
        let text = motion.render(&names);
        // pieces sharing a motion merge, keeping the count within the product bound
        let (k, fresh) = idx.insert(&element);
        if fresh {
            pieces.push(Piece { motion, motion_text: text, element, points: Some(Vec::new()), predicate: None, mass: 0.0 });
        }
        let piece = &mut pieces[k];
        piece.mass += points.len() as f64 * model.weight;
        piece.points.as_mut().unwrap().extend(points);
    }
    for p in &mut pieces {
        p.points.as_mut().unwrap().sort_unstable();
    }
    residue_source.sort_unstable();
    residue_target.sort_unstable();
    let mut out = Certificate::new(ValidationMode::Exact, model, alphabet);
    out.source = first.source.clone();
    out.target = second.target.clone();
    out.source_mass = first.source_mass;
    out.target_mass = second.target_mass;
    out.residue_mass = residue_source.len().max(residue_target.len()) as f64 * model.weight;
    out.residue_source = residue_source;
    out.residue_target = residue_target;
    out.pieces = pieces;
    out.metadata.insert("composition".into(), "chained".into());
    Ok(out)
}
