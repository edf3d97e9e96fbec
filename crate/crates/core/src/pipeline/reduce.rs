use std::sync::Arc;

use serde::Serialize;

use crate::group::{GeneratorSet, GroupElement, Word};
use crate::space::{SampledSet, SetPredicate, SpaceModel};
use crate::{Error, Result};

use super::{validate_certificate, Certificate, Piece, ValidationMode, ValidationReport};

#[derive(Clone, Debug, Serialize)]
pub struct ReductionCheck {
    pub pieces_partition_source: bool,
    pub images_partition_target: bool,
    pub images_union_is_c: bool,
    pub translates_of_c_disjoint: bool,
    pub piece_count: usize,
    pub distinct_motions: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    /// The shrunken open set `C ⊆ C'`.
    pub c: SetPredicate,
    pub centre: usize,
    /// `A_0, …, A_k` in the order of `T` with the identity first.
    pub pieces: Vec<SetPredicate>,
    /// `A' = A \ ∪ A_i`.
    pub rest: SetPredicate,
    pub target: SetPredicate,
    pub certificate: Certificate,
    pub validation: ValidationReport,
    pub check: ReductionCheck,
}

fn realize(model: &Arc<SpaceModel>, p: &SetPredicate) -> Result<SampledSet> {
    SampledSet::from_predicate(model, p)
}

/// Every point of `target` is some `g.x` with `g ∈ t`, `x ∈ a`.
pub fn check_cover(model: &Arc<SpaceModel>, t: &GeneratorSet, a: &SampledSet, target: &SampledSet) -> Result<()> {
    let mut reached = vec![false; model.len()];
    for g in t.elements() {
        for i in a.image(g)?.ids() {
            reached[i] = true;
        }
    }
    match target.ids().into_iter().find(|&i| !reached[i]) {
        Some(point) => Err(Error::CoverFails { point }),
        None => Ok(()),
    }
}

/// Moves the parts of `A` near the translates `γ.C` back onto `C`, turning a set
/// that merely covers `C'` into one that contains the open set `C ⊆ C'`.
pub fn reduce_to_open(
    model: &Arc<SpaceModel>,
    a: &SetPredicate,
    t: &GeneratorSet,
    c_open: &SetPredicate,
) -> Result<Reduction> {
    if !model.is_exact() {
        return Err(Error::NotExact("the reduction is checked point by point".into()));
    }
    if !t.is_symmetric() || !t.contains_identity() {
        return Err(Error::InvalidArgument("T must be symmetric and contain the identity".into()));
    }
    let a_set = realize(model, a)?;
    let c_open_set = realize(model, c_open)?;
    if c_open_set.count() == 0 {
        return Err(Error::InvalidArgument("C' has no model points".into()));
    }
    check_cover(model, t, &a_set, &c_open_set)?;

    // identity first, then the rest of T in order
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by_key(|&i| !t.members[i].element.is_identity());
    let gammas: Vec<&GroupElement> = order.iter().map(|&i| &t.members[i].element).collect();
    let words: Vec<&Word> = order.iter().map(|&i| &t.members[i].word).collect();

    let ids = c_open_set.ids();
    let centre = ids[ids.len() / 2];
    let x = model.coords[centre];
    let images: Vec<Vec<f64>> = gammas.iter().map(|g| g.apply_f64(&x[..model.dim])).collect();
    let mut sep = f64::INFINITY;
    for i in 0..images.len() {
        for j in 0..i {
            let d = images[i].iter().zip(&images[j]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            sep = sep.min(d);
        }
    }
    if sep == 0.0 {
        return Err(Error::InvalidArgument("two elements of T agree at the chosen point".into()));
    }
    let mut r = if sep.is_finite() { sep / 2.0 } else { 1.0 };
    let (c, c_set) = loop {
        let lo: Vec<f64> = x[..model.dim].iter().map(|v| v - r).collect();
        let hi: Vec<f64> = x[..model.dim].iter().map(|v| v + r).collect();
        let c = SetPredicate::intersection(vec![SetPredicate::rect(&lo, &hi), c_open.clone()]);
        let c_set = realize(model, &c)?;
        let mut seen = vec![false; model.len()];
        let mut disjoint = true;
        for g in &gammas {
            for i in c_set.image(g)?.ids() {
                disjoint &= !std::mem::replace(&mut seen[i], true);
            }
        }
        if disjoint {
            break (c, c_set);
        }
        r /= 2.0;
        if c_set.count() <= 1 {
            return Err(Error::InvalidArgument("cannot separate the translates of C on this model".into()));
        }
    };

    let mut pieces: Vec<SetPredicate> = Vec::with_capacity(gammas.len());
    for (i, g) in gammas.iter().enumerate() {
        let base = SetPredicate::intersection(vec![c.clone().image(g), a.clone()]);
        let mut removed = Vec::with_capacity(i);
        for (j, aj) in pieces.iter().enumerate() {
            let gij = g.compose(&gammas[j].inverse()?)?;
            removed.push(aj.clone().image(&gij));
        }
        pieces.push(if removed.is_empty() { base } else { base.minus(SetPredicate::union(removed)) });
    }
    let rest = a.clone().minus(SetPredicate::union(pieces.clone()));
    let target = SetPredicate::union(vec![rest.clone(), c.clone()]);

    let mut cert = Certificate::new(ValidationMode::Exact, model, t.alphabet.clone());
    let mut moved_union = vec![false; model.len()];
    let mut moved_disjoint = true;
    for (i, p) in pieces.iter().enumerate() {
        let set = realize(model, p)?;
        let inv = gammas[i].inverse()?;
        for j in set.image(&inv)?.ids() {
            moved_disjoint &= !std::mem::replace(&mut moved_union[j], true);
        }
        cert.pieces.push(Piece {
            motion: words[i].inverse(),
            motion_text: t.render(&words[i].inverse()),
            element: inv,
            points: Some(set.ids().into_iter().map(|v| v as u32).collect()),
            predicate: Some(p.clone()),
            mass: set.measure().value,
        });
    }
    let rest_set = realize(model, &rest)?;
    cert.pieces.push(Piece {
        motion: Word::empty(),
        motion_text: "e".into(),
        element: t.identity(),
        points: Some(rest_set.ids().into_iter().map(|v| v as u32).collect()),
        predicate: Some(rest.clone()),
        mass: rest_set.measure().value,
    });
    let target_set = realize(model, &target)?;
    cert.source = Some(a.clone());
    cert.target = Some(target.clone());
    cert.source_mass = a_set.measure().value;
    cert.target_mass = target_set.measure().value;
    cert.metadata.insert("construction".into(), "open-set reduction".into());

    let validation = validate_certificate(&cert, model, &a_set, &target_set);
    let union_set = SampledSet::from_mask(model, moved_union)?;
    let mut motions: Vec<&GroupElement> = Vec::new();
    for p in &cert.pieces {
        if !motions.iter().any(|m| m.equals(&p.element)) {
            motions.push(&p.element);
        }
    }
    let check = ReductionCheck {
        pieces_partition_source: validation.ok,
        images_partition_target: validation.ok && moved_disjoint,
        images_union_is_c: union_set.same_points(&c_set),
        translates_of_c_disjoint: true,
        piece_count: cert.pieces.len(),
        distinct_motions: motions.len(),
    };
    Ok(Reduction { c, centre, pieces, rest, target, certificate: cert, validation, check })
}
