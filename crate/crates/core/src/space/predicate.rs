use serde::{Deserialize, Serialize};

use crate::group::{ElementKind, GroupElement};
use crate::numeric::BOUNDARY_TOL;
use crate::{Error, Result};

pub const PREDICATE_SCHEMA: &str = "equidecomp.predicate/v1";

/// Symbolic measurable set. Planar primitives read the first two coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum SetPredicate {
    All,
    #[serde(rename = "none")]
    Empty,
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Directions within `angle` of `axis`, closed.
    Cap { axis: [f64; 3], angle: f64 },
    /// `z_min <= |x| <= z_max`.
    Shell { z_min: f64, z_max: f64 },
    /// Points whose norm lies in a fat Cantor subset of `[z_min, z_max]`:
    /// at step `k` the middle `ratio^k` fraction of every remaining interval
    /// is removed, for `depth` steps.
    FatCantorShell { z_min: f64, z_max: f64, depth: u32, ratio: f64 },
    /// Half-open box `lo <= x < hi`.
    #[serde(rename = "box")]
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    /// `normal · x <= offset`.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// Polar angle of `(x, y)` in `[alpha, beta)` (radians, taken mod 2π).
    Sector { alpha: f64, beta: f64 },
    Union { of: Vec<SetPredicate> },
    Intersection { of: Vec<SetPredicate> },
    Complement { of: Box<SetPredicate> },
    Difference { left: Box<SetPredicate>, right: Box<SetPredicate> },
    /// The image `g.P = {g.x : x in P}`.
    Image { by: GroupElement, of: Box<SetPredicate> },
}

/// Versioned JSON wrapper.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredicateDoc {
    pub schema: String,
    pub predicate: SetPredicate,
}

impl PredicateDoc {
    pub fn new(predicate: SetPredicate) -> Self {
        PredicateDoc { schema: PREDICATE_SCHEMA.into(), predicate }
    }

    pub fn parse(s: &str) -> Result<SetPredicate> {
        let doc: PredicateDoc = serde_json::from_str(s)?;
        if doc.schema != PREDICATE_SCHEMA {
            return Err(Error::InvalidArgument(format!("unknown schema {:?}", doc.schema)));
        }
        Ok(doc.predicate)
    }
}

impl SetPredicate {
    pub fn rect(lo: &[f64], hi: &[f64]) -> Self {
        SetPredicate::Rect { lo: lo.to_vec(), hi: hi.to_vec() }
    }

    pub fn union(of: Vec<SetPredicate>) -> Self {
        SetPredicate::Union { of }
    }

    pub fn intersection(of: Vec<SetPredicate>) -> Self {
        SetPredicate::Intersection { of }
    }

    pub fn complement(self) -> Self {
        SetPredicate::Complement { of: Box::new(self) }
    }

    pub fn minus(self, right: SetPredicate) -> Self {
        SetPredicate::Difference { left: Box::new(self), right: Box::new(right) }
    }

    pub fn image(self, by: &GroupElement) -> Self {
        SetPredicate::Image { by: by.clone(), of: Box::new(self) }
    }

    /// Union of shells over a list of radial intervals.
    pub fn shells(intervals: &[(f64, f64)]) -> Self {
        SetPredicate::union(
            intervals
                .iter()
                .map(|&(z_min, z_max)| SetPredicate::Shell { z_min, z_max })
                .collect(),
        )
    }

    pub fn size(&self) -> usize {
        use SetPredicate::*;
        1 + match self {
            Union { of } | Intersection { of } => of.iter().map(SetPredicate::size).sum(),
            Complement { of } | Image { of, .. } => of.size(),
            Difference { left, right } => left.size() + right.size(),
            _ => 0,
        }
    }

    pub fn compile(&self) -> Result<CompiledPredicate> {
        CompiledPredicate::new(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PredicateDoc::new(self.clone()))?)
    }
}

/// Intervals kept by a fat Cantor construction on `[a, b]`.
pub fn fat_cantor_intervals(a: f64, b: f64, depth: u32, ratio: f64) -> Vec<(f64, f64)> {
    let mut ivs = vec![(a, b)];
    for k in 1..=depth {
        let frac = ratio.powi(k as i32);
        ivs = ivs
            .into_iter()
            .flat_map(|(l, r)| {
                let cut = (r - l) * frac;
                let m = (l + r) / 2.0;
                [(l, m - cut / 2.0), (m + cut / 2.0, r)]
            })
            .collect();
    }
    ivs
}

/// Pointwise evaluator with precomputed inverse motions.
#[derive(Clone, Debug)]
pub enum CompiledPredicate {
    All,
    Empty,
    Ball { center: [f64; 3], r2: f64 },
    Cap { axis: [f64; 3], cos: f64 },
    Shell { lo: f64, hi: f64 },
    Intervals { ivs: Vec<(f64, f64)> },
    Rect { lo: Vec<f64>, hi: Vec<f64> },
    HalfSpace { normal: Vec<f64>, offset: f64 },
    Sector { alpha: f64, beta: f64 },
    Union(Vec<CompiledPredicate>),
    Intersection(Vec<CompiledPredicate>),
    Complement(Box<CompiledPredicate>),
    Difference(Box<CompiledPredicate>, Box<CompiledPredicate>),
    Moved { inv_linear: Vec<f64>, inv_translation: Vec<f64>, dim: usize, torus: bool, inner: Box<CompiledPredicate> },
}

fn norm(x: &[f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

impl CompiledPredicate {
    fn new(p: &SetPredicate) -> Result<Self> {
        use SetPredicate as P;
        Ok(match p {
            P::All => Self::All,
            P::Empty => Self::Empty,
            P::Ball { center, radius } => {
                let mut c = [0.0; 3];
                c[..center.len().min(3)].copy_from_slice(&center[..center.len().min(3)]);
                Self::Ball { center: c, r2: radius * radius }
            }
            P::Cap { axis, angle } => {
                let n = norm(axis);
                if n == 0.0 {
                    return Err(Error::InvalidArgument("cap axis is zero".into()));
                }
                Self::Cap { axis: axis.map(|c| c / n), cos: angle.cos() }
            }
            P::Shell { z_min, z_max } => Self::Shell { lo: *z_min, hi: *z_max },
            P::FatCantorShell { z_min, z_max, depth, ratio } => {
                if !(0.0..1.0).contains(ratio) {
                    return Err(Error::InvalidArgument("fat Cantor ratio must be in [0, 1)".into()));
                }
                Self::Intervals { ivs: fat_cantor_intervals(*z_min, *z_max, *depth, *ratio) }
            }
            P::Rect { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(Error::Dimension("box corners differ in length".into()));
                }
                Self::Rect { lo: lo.clone(), hi: hi.clone() }
            }
            P::HalfSpace { normal, offset } => Self::HalfSpace { normal: normal.clone(), offset: *offset },
            P::Sector { alpha, beta } => Self::Sector { alpha: *alpha, beta: *beta },
            P::Union { of } => Self::Union(of.iter().map(Self::new).collect::<Result<_>>()?),
            P::Intersection { of } => Self::Intersection(of.iter().map(Self::new).collect::<Result<_>>()?),
            P::Complement { of } => Self::Complement(Box::new(Self::new(of)?)),
            P::Difference { left, right } => {
                Self::Difference(Box::new(Self::new(left)?), Box::new(Self::new(right)?))
            }
            P::Image { by, of } => {
                let inv = by.inverse()?;
                Self::Moved {
                    inv_linear: inv.linear_f64(),
                    inv_translation: inv.translation_f64(),
                    dim: by.dim,
                    torus: by.kind == ElementKind::TorusAutomorphism,
                    inner: Box::new(Self::new(of)?),
                }
            }
        })
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        use CompiledPredicate as C;
        match self {
            C::All => true,
            C::Empty => false,
            C::Ball { center, r2 } => {
                (0..3).map(|k| (x[k] - center[k]).powi(2)).sum::<f64>() <= r2 + BOUNDARY_TOL
            }
            C::Cap { axis, cos } => {
                let n = norm(x);
                n > 0.0 && (0..3).map(|k| x[k] * axis[k]).sum::<f64>() >= n * cos - BOUNDARY_TOL
            }
            C::Shell { lo, hi } => {
                let r = norm(x);
                r >= lo - BOUNDARY_TOL && r <= hi + BOUNDARY_TOL
            }
            C::Intervals { ivs } => {
                let r = norm(x);
                ivs.iter().any(|&(l, h)| r >= l - BOUNDARY_TOL && r <= h + BOUNDARY_TOL)
            }
            C::Rect { lo, hi } => lo.iter().zip(hi).enumerate().all(|(k, (l, h))| x[k] >= *l && x[k] < *h),
            C::HalfSpace { normal, offset } => {
                normal.iter().enumerate().map(|(k, n)| n * x[k]).sum::<f64>() <= offset + BOUNDARY_TOL
            }
            C::Sector { alpha, beta } => {
                let tau = std::f64::consts::TAU;
                let t = x[1].atan2(x[0]).rem_euclid(tau);
                let a = alpha.rem_euclid(tau);
                let width = beta - alpha;
                if width >= tau {
                    return true;
                }
                (t - a).rem_euclid(tau) < width
            }
            C::Union(v) => v.iter().any(|c| c.contains(x)),
            C::Intersection(v) => v.iter().all(|c| c.contains(x)),
            C::Complement(c) => !c.contains(x),
            C::Difference(a, b) => a.contains(x) && !b.contains(x),
            C::Moved { inv_linear, inv_translation, dim, torus, inner } => {
                let n = *dim;
                let mut y = [0.0; 3];
                for i in 0..n {
                    y[i] = (0..n).map(|k| inv_linear[i * n + k] * x[k]).sum::<f64>() + inv_translation[i];
                    if *torus {
                        y[i] = y[i].rem_euclid(1.0);
                    }
                }
                inner.contains(&y)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{q, qi};

    #[test]
    fn json_round_trip() {
        let g = GroupElement::torus([[1, 1], [0, 1]], [q(1, 4), qi(0)]).unwrap();
        let p = SetPredicate::union(vec![
            SetPredicate::rect(&[0.0, 0.0], &[0.5, 0.5]),
            SetPredicate::Cap { axis: [0.0, 0.0, 1.0], angle: 0.3 }.complement(),
            SetPredicate::Shell { z_min: 1.0, z_max: 1.2 }.image(&g),
        ]);
        let s = p.to_json().unwrap();
        assert!(s.contains(PREDICATE_SCHEMA));
        assert_eq!(PredicateDoc::parse(&s).unwrap(), p);
    }

    #[test]
    fn primitives() {
        let c = SetPredicate::rect(&[0.0, 0.0], &[0.5, 0.5]).compile().unwrap();
        assert!(c.contains(&[0.0, 0.25, 0.0]));
        assert!(!c.contains(&[0.5, 0.25, 0.0]));
        let s = SetPredicate::Sector { alpha: -0.5, beta: 0.5 }.compile().unwrap();
        assert!(s.contains(&[1.0, 0.1, 0.0]));
        assert!(!s.contains(&[-1.0, 0.0, 0.0]));
        let cap = SetPredicate::Cap { axis: [0.0, 0.0, 2.0], angle: std::f64::consts::FRAC_PI_2 }.compile().unwrap();
        assert!(cap.contains(&[0.0, 1.0, 0.0]) && cap.contains(&[0.0, 0.0, 1.0]));
        assert!(!cap.contains(&[0.0, 0.0, -1.0]));
    }

    #[test]
    fn image_moves_membership() {
        let t = GroupElement::torus_translation([q(1, 2), qi(0)]).unwrap();
        let p = SetPredicate::rect(&[0.0, 0.0], &[0.5, 1.0]).image(&t).compile().unwrap();
        assert!(p.contains(&[0.75, 0.1, 0.0]));
        assert!(!p.contains(&[0.25, 0.1, 0.0]));
    }

    #[test]
    fn fat_cantor_total_length() {
        let ivs = fat_cantor_intervals(0.0, 1.0, 3, 0.25);
        assert_eq!(ivs.len(), 8);
        let total: f64 = ivs.iter().map(|(a, b)| b - a).sum();
        let expected = (1.0 - 0.25) * (1.0 - 0.0625) * (1.0 - 0.015625);
        assert!((total - expected).abs() < 1e-12);
    }
}
