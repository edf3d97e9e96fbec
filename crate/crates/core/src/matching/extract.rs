use std::collections::BTreeMap;

use crate::graphing::Graphing;
use crate::pipeline::{Certificate, Piece, ValidationMode};
use crate::space::NONE;
use crate::{Error, Result};

use super::Matching;

/// Groups matched left vertices by the label of their matched edge. Each
/// nonempty group becomes a piece moved by that label's element.
pub fn extract_equidecomposition(g: &Graphing, m: &Matching, threshold: f64) -> Result<Certificate> {
    let o = g
        .origin
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("graphing has no model; nothing to certify".into()))?;
    let residue_mass = m.unmatched_left().max(m.unmatched_right()) as f64 * g.weight;
    if residue_mass > threshold {
        return Err(Error::Residue { residue: residue_mass, threshold });
    }
    let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (u, &k) in m.mate_left.iter().enumerate() {
        if k != NONE {
            groups.entry(g.edges[k as usize].label).or_default().push(o.left_ids[u]);
        }
    }
    let pieces = groups
        .into_iter()
        .map(|(label, points)| {
            let member = &o.labels.members[label as usize];
            Piece {
                motion: member.word.clone(),
                motion_text: o.labels.render(&member.word),
                element: member.element.clone(),
                mass: points.len() as f64 * g.weight,
                points: Some(points),
                predicate: None,
            }
        })
        .collect();
    let residue_source = (0..g.n_left).filter(|&u| m.mate_left[u] == NONE).map(|u| o.left_ids[u]).collect();
    let residue_target = (0..g.n_right).filter(|&v| m.mate_right[v] == NONE).map(|v| o.right_ids[v]).collect();
    let mut cert = Certificate::new(
        if o.model.is_exact() { ValidationMode::Exact } else { ValidationMode::Statistical },
        &o.model,
        o.labels.alphabet.clone(),
    );
    cert.pieces = pieces;
    cert.residue_source = residue_source;
    cert.residue_target = residue_target;
    cert.residue_mass = residue_mass;
    cert.source_mass = o.left.measure().value;
    cert.target_mass = o.right.measure().value;
    cert.source = o.left.source.clone();
    cert.target = o.right.source.clone();
    cert.stage = Some(m.stage);
    Ok(cert)
}
