use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use super::model::{SpaceModel, NONE};
use super::predicate::SetPredicate;
use crate::group::{GeneratorSet, GroupElement};
use crate::numeric::{binomial_radius, format_q, Q};
use crate::par::{self, Exec};
use crate::{Error, Result};

/// A measured value with a 99% confidence half-width (zero on exact models).
#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub value: f64,
    pub radius: f64,
    pub count: u64,
    /// Exact value as `p/q` on exact models.
    pub exact: Option<String>,
    #[serde(skip)]
    pub exact_q: Option<Q>,
}

impl Measurement {
    fn from_count(model: &SpaceModel, count: u64) -> Measurement {
        let value = count as f64 * model.weight;
        match model.exact_weight {
            Some(w) => {
                let e = w * Q::from_integer(count as i128);
                Measurement { value, radius: 0.0, count, exact: Some(format_q(&e)), exact_q: Some(e) }
            }
            None => {
                let n = model.len();
                let p = count as f64 / n as f64;
                Measurement {
                    value,
                    radius: model.total_mass * binomial_radius(p, n),
                    count,
                    exact: None,
                    exact_q: None,
                }
            }
        }
    }
}

/// A subset of a model's points.
#[derive(Clone, Debug)]
pub struct SampledSet {
    pub model: Arc<SpaceModel>,
    pub mask: Vec<bool>,
    pub source: Option<SetPredicate>,
}

fn realize(model: &SpaceModel, p: &SetPredicate) -> Result<Vec<bool>> {
    use SetPredicate as P;
    let n = model.len();
    if !model.is_exact() {
        let c = p.compile()?;
        return Ok(par::collect(Exec::Parallel, n, |i| c.contains(&model.coords[i])));
    }
    // Exact models: Boolean structure and motions act on masks, so images are
    // exact index permutations rather than floating re-evaluations.
    Ok(match p {
        P::Union { of } => {
            let mut m = vec![false; n];
            for q in of {
                m.iter_mut().zip(realize(model, q)?).for_each(|(a, b)| *a |= b);
            }
            m
        }
        P::Intersection { of } => {
            let mut m = vec![true; n];
            for q in of {
                m.iter_mut().zip(realize(model, q)?).for_each(|(a, b)| *a &= b);
            }
            m
        }
        P::Complement { of } => realize(model, of)?.into_iter().map(|b| !b).collect(),
        P::Difference { left, right } => realize(model, left)?
            .into_iter()
            .zip(realize(model, right)?)
            .map(|(a, b)| a && !b)
            .collect(),
        P::Image { by, of } => push_forward(model, &realize(model, of)?, by)?,
        leaf => {
            let c = leaf.compile()?;
            par::collect(Exec::Parallel, n, |i| c.contains(&model.coords[i]))
        }
    })
}

fn push_forward(model: &SpaceModel, mask: &[bool], g: &GroupElement) -> Result<Vec<bool>> {
    let map = model.transport(g)?;
    let mut out = vec![false; model.len()];
    for (i, &b) in mask.iter().enumerate() {
        if b && map.image[i] != NONE {
            out[map.image[i] as usize] = true;
        }
    }
    Ok(out)
}

impl SampledSet {
    pub fn from_predicate(model: &Arc<SpaceModel>, p: &SetPredicate) -> Result<SampledSet> {
        Ok(SampledSet { model: model.clone(), mask: realize(model, p)?, source: Some(p.clone()) })
    }

    pub fn from_mask(model: &Arc<SpaceModel>, mask: Vec<bool>) -> Result<SampledSet> {
        if mask.len() != model.len() {
            return Err(Error::Dimension(format!("mask of length {} for {} points", mask.len(), model.len())));
        }
        Ok(SampledSet { model: model.clone(), mask, source: None })
    }

    pub fn from_ids(model: &Arc<SpaceModel>, ids: impl IntoIterator<Item = usize>) -> Result<SampledSet> {
        let mut mask = vec![false; model.len()];
        for i in ids {
            *mask
                .get_mut(i)
                .ok_or_else(|| Error::InvalidArgument(format!("point id {i} out of range")))? = true;
        }
        SampledSet::from_mask(model, mask)
    }

    pub fn empty(model: &Arc<SpaceModel>) -> SampledSet {
        SampledSet { model: model.clone(), mask: vec![false; model.len()], source: Some(SetPredicate::Empty) }
    }

    pub fn full(model: &Arc<SpaceModel>) -> SampledSet {
        SampledSet { model: model.clone(), mask: vec![true; model.len()], source: Some(SetPredicate::All) }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn count(&self) -> usize {
        par::count(Exec::Parallel, self.mask.len(), |i| self.mask[i]) as usize
    }

    pub fn ids(&self) -> Vec<usize> {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn measure(&self) -> Measurement {
        Measurement::from_count(&self.model, self.count() as u64)
    }

    pub fn exact_measure(&self) -> Option<Q> {
        self.model.exact_weight.map(|w| w * Q::from_integer(self.count() as i128))
    }

    fn check(&self, other: &SampledSet) -> Result<()> {
        if Arc::ptr_eq(&self.model, &other.model) {
            Ok(())
        } else {
            Err(Error::IncompatibleModel)
        }
    }

    fn zip_with(&self, other: &SampledSet, f: impl Fn(bool, bool) -> bool, src: Option<SetPredicate>) -> Result<SampledSet> {
        self.check(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| f(a, b)).collect();
        Ok(SampledSet { model: self.model.clone(), mask, source: src })
    }

    fn both(&self, other: &SampledSet, f: impl Fn(SetPredicate, SetPredicate) -> SetPredicate) -> Option<SetPredicate> {
        Some(f(self.source.clone()?, other.source.clone()?))
    }

    pub fn union(&self, other: &SampledSet) -> Result<SampledSet> {
        let src = self.both(other, |a, b| SetPredicate::union(vec![a, b]));
        self.zip_with(other, |a, b| a || b, src)
    }

    pub fn intersection(&self, other: &SampledSet) -> Result<SampledSet> {
        let src = self.both(other, |a, b| SetPredicate::intersection(vec![a, b]));
        self.zip_with(other, |a, b| a && b, src)
    }

    pub fn difference(&self, other: &SampledSet) -> Result<SampledSet> {
        let src = self.both(other, |a, b| a.minus(b));
        self.zip_with(other, |a, b| a && !b, src)
    }

    pub fn complement(&self) -> SampledSet {
        SampledSet {
            model: self.model.clone(),
            mask: self.mask.iter().map(|b| !b).collect(),
            source: self.source.clone().map(SetPredicate::complement),
        }
    }

    pub fn is_subset(&self, other: &SampledSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn is_disjoint(&self, other: &SampledSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !(a && b))
    }

    pub fn same_points(&self, other: &SampledSet) -> bool {
        self.mask == other.mask
    }

    /// `g.self`: exact push-forward on transport models, predicate transport
    /// on clouds.
    pub fn image(&self, g: &GroupElement) -> Result<SampledSet> {
        let source = self.source.clone().map(|p| p.image(g));
        if self.model.supports_transport() {
            return Ok(SampledSet { model: self.model.clone(), mask: push_forward(&self.model, &self.mask, g)?, source });
        }
        match source {
            Some(p) => SampledSet::from_predicate(&self.model, &p),
            None => Err(Error::NotExact("cloud image needs a predicate-backed set".into())),
        }
    }
}

/// `mu(P)` on a model.
pub fn measure(model: &Arc<SpaceModel>, p: &SetPredicate) -> Result<Measurement> {
    Ok(SampledSet::from_predicate(model, p)?.measure())
}

/// `mu(S.U ∩ C)`: points of `C` lying in `g.U` for some `g` in `S`, tested as
/// `g^-1.x ∈ U`.
pub fn saturate(model: &Arc<SpaceModel>, s: &GeneratorSet, u: &SampledSet, c: &SampledSet) -> Result<Measurement> {
    u.check(c)?;
    if !Arc::ptr_eq(model, &u.model) {
        return Err(Error::IncompatibleModel);
    }
    let n = model.len();
    if model.supports_transport() {
        let maps = s
            .elements()
            .map(|g| model.transport(&g.inverse()?))
            .collect::<Result<Vec<_>>>()?;
        let count = par::count(Exec::Parallel, n, |x| {
            c.mask[x] && maps.iter().any(|m| m.image[x] != NONE && u.mask[m.image[x] as usize])
        });
        return Ok(Measurement::from_count(model, count));
    }
    let src = u
        .source
        .as_ref()
        .ok_or_else(|| Error::NotExact("cloud saturation needs a predicate-backed set".into()))?;
    let moved = s
        .elements()
        .map(|g| src.clone().image(g).compile())
        .collect::<Result<Vec<_>>>()?;
    let count = par::count(Exec::Parallel, n, |x| {
        c.mask[x] && moved.iter().any(|p| p.contains(&model.coords[x]))
    });
    Ok(Measurement::from_count(model, count))
}

impl Measurement {
    pub fn is_zero(&self) -> bool {
        self.exact_q.map_or(self.value == 0.0, |q| q.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{identity_multiset, sl2z_generators, torus_translations, ElementKind};
    use crate::numeric::{frac, q, qi};
    use crate::space::build_model;

    fn torus(q_: usize) -> Arc<SpaceModel> {
        Arc::new(build_model("rational-torus", q_, 0).unwrap())
    }

    #[test]
    fn measure_examples() {
        let m = torus(4);
        let all = measure(&m, &SetPredicate::All).unwrap();
        assert_eq!(all.exact_q, Some(qi(1)));
        let quarter = measure(&m, &SetPredicate::rect(&[0.0, 0.0], &[0.5, 0.5])).unwrap();
        assert_eq!(quarter.exact_q, Some(q(4, 16)));
        let s = Arc::new(build_model("sphere-cloud", 20_000, 5).unwrap());
        let h = measure(&s, &SetPredicate::Cap { axis: [0.3, -0.2, 0.9], angle: std::f64::consts::FRAC_PI_2 }).unwrap();
        assert!((h.value - 0.5).abs() <= h.radius, "{h:?}");
    }

    #[test]
    fn saturate_identity_and_oracle() {
        let m = torus(9);
        let u = SampledSet::from_predicate(&m, &SetPredicate::rect(&[0.0, 0.0], &[0.3, 0.6])).unwrap();
        let c = SampledSet::from_predicate(&m, &SetPredicate::rect(&[0.2, 0.0], &[1.0, 0.8])).unwrap();
        let e = identity_multiset(ElementKind::TorusAutomorphism, 2, 1);
        assert_eq!(saturate(&m, &e, &u, &c).unwrap().count, u.intersection(&c).unwrap().count() as u64);

        // brute force: push every point of U through every element exactly
        let s = sl2z_generators().union(&torus_translations(9).unwrap()).unwrap();
        let mut hit = vec![false; m.len()];
        for g in s.elements() {
            for i in u.ids() {
                let y = g.apply_exact(&m.exact_point(i).unwrap()).unwrap();
                let y: Vec<Q> = y.iter().map(frac).collect();
                hit[m.index_of_exact(&y).unwrap()] = true;
            }
        }
        let brute = hit.iter().zip(&c.mask).filter(|(&h, &cc)| h && cc).count() as u64;
        assert_eq!(saturate(&m, &s, &u, &c).unwrap().count, brute);
    }

    #[test]
    fn image_preserves_measure_on_torus() {
        let m = torus(12);
        let a = SampledSet::from_predicate(&m, &SetPredicate::Ball { center: vec![0.3, 0.4], radius: 0.27 }).unwrap();
        for g in sl2z_generators().elements() {
            assert_eq!(a.image(g).unwrap().count(), a.count());
        }
    }

    #[test]
    fn image_predicate_matches_push_forward() {
        let m = torus(10);
        let g = sl2z_generators().members[2].element.clone();
        let p = SetPredicate::rect(&[0.1, 0.2], &[0.5, 0.9]);
        let a = SampledSet::from_predicate(&m, &p).unwrap().image(&g).unwrap();
        let b = SampledSet::from_predicate(&m, &p.image(&g)).unwrap();
        assert!(a.same_points(&b));
    }

    #[test]
    fn incompatible_models_rejected() {
        let a = SampledSet::full(&torus(3));
        let b = SampledSet::full(&torus(3));
        assert!(matches!(a.union(&b), Err(Error::IncompatibleModel)));
    }
}
