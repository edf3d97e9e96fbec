use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::numeric::{self, format_q, frac, is_integer, serde_q_vec, Q};
use crate::{Error, Result};

/// Entrywise tolerance for equality of floating elements.
pub const FLOAT_EQ_TOL: f64 = 1e-9;

const ORTHO_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    Rotation,
    RigidMotion,
    /// Integer matrix of determinant ±1 plus a rational translation, acting on
    /// `R^2 / Z^2`. Images are reduced mod 1.
    TorusAutomorphism,
    Affine,
}

/// Row-major entries, either exact rationals or floats.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entries {
    Exact(#[serde(with = "serde_q_vec")] Vec<Q>),
    Float(Vec<f64>),
}

impl Entries {
    pub fn len(&self) -> usize {
        match self {
            Entries::Exact(v) => v.len(),
            Entries::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Entries::Exact(_))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Entries::Exact(v) => v.iter().map(numeric::q_to_f64).collect(),
            Entries::Float(v) => v.clone(),
        }
    }

    pub fn exact(&self) -> Option<&[Q]> {
        match self {
            Entries::Exact(v) => Some(v),
            Entries::Float(_) => None,
        }
    }
}

/// An affine map `x -> Lx + t` on `R^2` or `R^3` (or on the torus).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupElement {
    pub kind: ElementKind,
    pub dim: usize,
    pub linear: Entries,
    pub translation: Entries,
}

fn mat_mul_q(a: &[Q], b: &[Q], n: usize) -> Result<Vec<Q>> {
    let mut out = vec![Q::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = Q::zero();
            for k in 0..n {
                s = numeric::add(&s, &numeric::mul(&a[i * n + k], &b[k * n + j])?)?;
            }
            out[i * n + j] = s;
        }
    }
    Ok(out)
}

fn mat_vec_q(a: &[Q], x: &[Q], n: usize) -> Result<Vec<Q>> {
    (0..n)
        .map(|i| {
            let mut s = Q::zero();
            for k in 0..n {
                s = numeric::add(&s, &numeric::mul(&a[i * n + k], &x[k])?)?;
            }
            Ok(s)
        })
        .collect()
}

fn mat_mul_f(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n).map(|k| a[i * n + k] * b[k * n + j]).sum();
        }
    }
    out
}

fn mat_vec_f(a: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|k| a[i * n + k] * x[k]).sum())
        .collect()
}

fn det_q(a: &[Q], n: usize) -> Result<Q> {
    let m = |x: &Q, y: &Q| numeric::mul(x, y);
    match n {
        2 => numeric::sub(&m(&a[0], &a[3])?, &m(&a[1], &a[2])?),
        3 => {
            let c0 = numeric::sub(&m(&a[4], &a[8])?, &m(&a[5], &a[7])?)?;
            let c1 = numeric::sub(&m(&a[3], &a[8])?, &m(&a[5], &a[6])?)?;
            let c2 = numeric::sub(&m(&a[3], &a[7])?, &m(&a[4], &a[6])?)?;
            let s = numeric::sub(&m(&a[0], &c0)?, &m(&a[1], &c1)?)?;
            numeric::add(&s, &m(&a[2], &c2)?)
        }
        _ => Err(Error::Dimension(format!("unsupported dimension {n}"))),
    }
}

fn det_f(a: &[f64], n: usize) -> f64 {
    match n {
        2 => a[0] * a[3] - a[1] * a[2],
        _ => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
    }
}

/// Cofactor-based inverse; `n` is 2 or 3.
fn inv_q(a: &[Q], n: usize) -> Result<Vec<Q>> {
    let d = det_q(a, n)?;
    if d.is_zero() {
        return Err(Error::InvalidElement("singular linear part".into()));
    }
    let adj: Vec<Q> = match n {
        2 => vec![a[3], -a[1], -a[2], a[0]],
        _ => {
            let mut out = vec![Q::zero(); 9];
            for i in 0..3 {
                for j in 0..3 {
                    // cofactor of (j, i) gives adjugate entry (i, j)
                    let r: Vec<usize> = (0..3).filter(|&r| r != j).collect();
                    let c: Vec<usize> = (0..3).filter(|&c| c != i).collect();
                    let minor = numeric::sub(
                        &numeric::mul(&a[r[0] * 3 + c[0]], &a[r[1] * 3 + c[1]])?,
                        &numeric::mul(&a[r[0] * 3 + c[1]], &a[r[1] * 3 + c[0]])?,
                    )?;
                    out[i * 3 + j] = if (i + j) % 2 == 0 { minor } else { -minor };
                }
            }
            out
        }
    };
    adj.iter().map(|x| numeric::mul(x, &(Q::one() / d))).collect()
}

fn inv_f(a: &[f64], n: usize) -> Vec<f64> {
    let d = det_f(a, n);
    match n {
        2 => vec![a[3] / d, -a[1] / d, -a[2] / d, a[0] / d],
        _ => {
            let mut out = vec![0.0; 9];
            for i in 0..3 {
                for j in 0..3 {
                    let r: Vec<usize> = (0..3).filter(|&r| r != j).collect();
                    let c: Vec<usize> = (0..3).filter(|&c| c != i).collect();
                    let minor = a[r[0] * 3 + c[0]] * a[r[1] * 3 + c[1]]
                        - a[r[0] * 3 + c[1]] * a[r[1] * 3 + c[0]];
                    out[i * 3 + j] = if (i + j) % 2 == 0 { minor } else { -minor } / d;
                }
            }
            out
        }
    }
}

fn transpose<T: Copy>(a: &[T], n: usize) -> Vec<T> {
    (0..n * n).map(|k| a[(k % n) * n + k / n]).collect()
}

fn is_rigid(kind: ElementKind) -> bool {
    matches!(kind, ElementKind::Rotation | ElementKind::RigidMotion)
}

impl GroupElement {
    pub fn identity(kind: ElementKind, dim: usize) -> Self {
        let mut l = vec![Q::zero(); dim * dim];
        for i in 0..dim {
            l[i * dim + i] = Q::one();
        }
        GroupElement {
            kind,
            dim,
            linear: Entries::Exact(l),
            translation: Entries::Exact(vec![Q::zero(); dim]),
        }
    }

    /// Builds and validates an element.
    pub fn new(kind: ElementKind, dim: usize, linear: Entries, translation: Entries) -> Result<Self> {
        let g = GroupElement { kind, dim, linear, translation };
        g.validate()?;
        Ok(g.canonical())
    }

    pub fn rotation_exact(m: Vec<Q>) -> Result<Self> {
        let dim = if m.len() == 4 { 2 } else { 3 };
        Self::new(ElementKind::Rotation, dim, Entries::Exact(m), Entries::Exact(vec![Q::zero(); dim]))
    }

    pub fn rotation_float(m: Vec<f64>) -> Result<Self> {
        let dim = if m.len() == 4 { 2 } else { 3 };
        Self::new(ElementKind::Rotation, dim, Entries::Float(m), Entries::Float(vec![0.0; dim]))
    }

    pub fn torus(m: [[i64; 2]; 2], t: [Q; 2]) -> Result<Self> {
        let l = m.iter().flatten().map(|&x| Q::from_integer(x as i128)).collect();
        Self::new(ElementKind::TorusAutomorphism, 2, Entries::Exact(l), Entries::Exact(t.to_vec()))
    }

    pub fn torus_translation(t: [Q; 2]) -> Result<Self> {
        Self::torus([[1, 0], [0, 1]], t)
    }

    pub fn affine_exact(dim: usize, linear: Vec<Q>, t: Vec<Q>) -> Result<Self> {
        Self::new(ElementKind::Affine, dim, Entries::Exact(linear), Entries::Exact(t))
    }

    pub fn check_invariants(&self) -> Result<()> {
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim;
        if !(n == 2 || n == 3) {
            return Err(Error::Dimension(format!("dimension {n} not in {{2, 3}}")));
        }
        if self.linear.len() != n * n || self.translation.len() != n {
            return Err(Error::Dimension("entry count does not match dimension".into()));
        }
        match self.kind {
            ElementKind::Rotation | ElementKind::RigidMotion => {
                if self.kind == ElementKind::Rotation && !self.translation_is_zero() {
                    return Err(Error::InvalidElement("rotation with nonzero translation".into()));
                }
                match &self.linear {
                    Entries::Exact(a) => {
                        let prod = mat_mul_q(&transpose(a, n), a, n)?;
                        let id = GroupElement::identity(self.kind, n);
                        if prod != id.linear.exact().unwrap() || det_q(a, n)? != Q::one() {
                            return Err(Error::InvalidElement("linear part not in SO(n)".into()));
                        }
                    }
                    Entries::Float(a) => {
                        let prod = mat_mul_f(&transpose(a, n), a, n);
                        let err = (0..n * n)
                            .map(|k| (prod[k] - if k % (n + 1) == 0 { 1.0 } else { 0.0 }).abs())
                            .fold(0.0, f64::max);
                        if err > ORTHO_TOL || (det_f(a, n) - 1.0).abs() > ORTHO_TOL {
                            return Err(Error::InvalidElement(format!(
                                "linear part not in SO(n): orthogonality defect {err:e}"
                            )));
                        }
                    }
                }
            }
            ElementKind::TorusAutomorphism => {
                let a = self
                    .linear
                    .exact()
                    .ok_or_else(|| Error::InvalidElement("torus matrix must be exact".into()))?;
                if n != 2 || !a.iter().all(is_integer) {
                    return Err(Error::InvalidElement("torus matrix must be an integer 2x2".into()));
                }
                if det_q(a, 2)?.abs() != Q::one() {
                    return Err(Error::InvalidElement("torus matrix must have determinant ±1".into()));
                }
                if !self.translation.is_exact() {
                    return Err(Error::InvalidElement("torus translation must be rational".into()));
                }
            }
            ElementKind::Affine => {
                let singular = match &self.linear {
                    Entries::Exact(a) => det_q(a, n)?.is_zero(),
                    Entries::Float(a) => det_f(a, n).abs() < 1e-300,
                };
                if singular {
                    return Err(Error::InvalidElement("singular linear part".into()));
                }
            }
        }
        Ok(())
    }

    fn canonical(mut self) -> Self {
        if self.kind == ElementKind::TorusAutomorphism {
            if let Entries::Exact(t) = &mut self.translation {
                for x in t.iter_mut() {
                    *x = frac(x);
                }
            }
        }
        self
    }

    fn translation_is_zero(&self) -> bool {
        match &self.translation {
            Entries::Exact(t) => t.iter().all(Zero::is_zero),
            Entries::Float(t) => t.iter().all(|x| *x == 0.0),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.linear.is_exact() && self.translation.is_exact()
    }

    pub fn linear_f64(&self) -> Vec<f64> {
        self.linear.to_f64()
    }

    pub fn translation_f64(&self) -> Vec<f64> {
        self.translation.to_f64()
    }

    fn compose_kind(a: ElementKind, b: ElementKind) -> Result<ElementKind> {
        if a == b {
            return Ok(a);
        }
        if is_rigid(a) && is_rigid(b) {
            return Ok(ElementKind::RigidMotion);
        }
        Err(Error::Kind(format!("{a:?} with {b:?}")))
    }

    /// The element acting as `x -> self.(h.x)`.
    pub fn compose(&self, h: &GroupElement) -> Result<GroupElement> {
        if self.dim != h.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, h.dim)));
        }
        let kind = Self::compose_kind(self.kind, h.kind)?;
        let n = self.dim;
        let linear = match (&self.linear, &h.linear) {
            (Entries::Exact(a), Entries::Exact(b)) => Entries::Exact(mat_mul_q(a, b, n)?),
            _ => Entries::Float(mat_mul_f(&self.linear_f64(), &h.linear_f64(), n)),
        };
        let translation = match (&self.linear, &h.translation, &self.translation) {
            (Entries::Exact(a), Entries::Exact(th), Entries::Exact(tg)) => {
                let v = mat_vec_q(a, th, n)?;
                Entries::Exact(
                    v.iter()
                        .zip(tg)
                        .map(|(x, y)| numeric::add(x, y))
                        .collect::<Result<_>>()?,
                )
            }
            _ => {
                let v = mat_vec_f(&self.linear_f64(), &h.translation_f64(), n);
                let tg = self.translation_f64();
                let mut t: Vec<f64> = v.iter().zip(&tg).map(|(x, y)| x + y).collect();
                if kind == ElementKind::TorusAutomorphism {
                    t.iter_mut().for_each(|x| *x = x.rem_euclid(1.0));
                }
                Entries::Float(t)
            }
        };
        Ok(GroupElement { kind, dim: n, linear, translation }.canonical())
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        let n = self.dim;
        let linear = match &self.linear {
            Entries::Exact(a) if is_rigid(self.kind) => Entries::Exact(transpose(a, n)),
            Entries::Exact(a) => Entries::Exact(inv_q(a, n)?),
            Entries::Float(a) if is_rigid(self.kind) => Entries::Float(transpose(a, n)),
            Entries::Float(a) => Entries::Float(inv_f(a, n)),
        };
        let translation = match (&linear, &self.translation) {
            (Entries::Exact(li), Entries::Exact(t)) => {
                Entries::Exact(mat_vec_q(li, t, n)?.into_iter().map(|x| -x).collect())
            }
            _ => Entries::Float(
                mat_vec_f(&linear.to_f64(), &self.translation_f64(), n)
                    .into_iter()
                    .map(|x| -x)
                    .collect(),
            ),
        };
        Ok(GroupElement { kind: self.kind, dim: n, linear, translation }.canonical())
    }

    pub fn pow(&self, k: u32) -> Result<GroupElement> {
        let mut acc = GroupElement::identity(self.kind, self.dim);
        for _ in 0..k {
            acc = acc.compose(self)?;
        }
        Ok(acc)
    }

    /// Exact image of a rational point.
    pub fn apply_exact(&self, x: &[Q]) -> Result<Vec<Q>> {
        let (a, t) = match (&self.linear, &self.translation) {
            (Entries::Exact(a), Entries::Exact(t)) => (a, t),
            _ => return Err(Error::NotExact("element has floating entries".into())),
        };
        if x.len() != self.dim {
            return Err(Error::Dimension(format!("point of length {}", x.len())));
        }
        let mut y = mat_vec_q(a, x, self.dim)?;
        for (yi, ti) in y.iter_mut().zip(t) {
            *yi = numeric::add(yi, ti)?;
            if self.kind == ElementKind::TorusAutomorphism {
                *yi = frac(yi);
            }
        }
        Ok(y)
    }

    pub fn apply_f64(&self, x: &[f64]) -> Vec<f64> {
        let a = self.linear_f64();
        let t = self.translation_f64();
        let mut y = mat_vec_f(&a, x, self.dim);
        for (yi, ti) in y.iter_mut().zip(&t) {
            *yi += ti;
            if self.kind == ElementKind::TorusAutomorphism {
                *yi = yi.rem_euclid(1.0);
            }
        }
        y
    }

    /// Flattened entries `linear ++ translation` as floats.
    pub fn flat_f64(&self) -> Vec<f64> {
        let mut v = self.linear_f64();
        v.extend(self.translation_f64());
        v
    }

    /// Exact elements compare exactly; anything else entrywise within
    /// [`FLOAT_EQ_TOL`], with torus translations compared on the circle.
    pub fn equals(&self, other: &GroupElement) -> bool {
        if self.dim != other.dim {
            return false;
        }
        if self.is_exact() && other.is_exact() {
            return self.linear.exact() == other.linear.exact()
                && self.translation.exact() == other.translation.exact();
        }
        let torus = self.kind == ElementKind::TorusAutomorphism;
        let n = self.dim * self.dim;
        self.flat_f64()
            .iter()
            .zip(other.flat_f64())
            .enumerate()
            .all(|(k, (a, b))| {
                let mut d = (a - b).abs();
                if torus && k >= n {
                    d = d.min(1.0 - d);
                }
                d <= FLOAT_EQ_TOL
            })
    }

    pub fn is_identity(&self) -> bool {
        self.equals(&GroupElement::identity(self.kind, self.dim))
    }

    /// Integer data of an exact torus element on `(1/q)Z^2`: matrix entries and
    /// translation numerators over `q`, or `None` if the translation is not in
    /// `(1/q)Z^2`.
    pub fn torus_grid_data(&self, q: u64) -> Option<([i64; 4], [i64; 2])> {
        let a = self.linear.exact()?;
        let t = self.translation.exact()?;
        if !a.iter().all(is_integer) {
            return None;
        }
        let mut m = [0i64; 4];
        for (k, x) in a.iter().enumerate().take(4) {
            m[k] = i64::try_from(*x.numer()).ok()?;
        }
        let mut s = [0i64; 2];
        for (k, x) in t.iter().enumerate().take(2) {
            let v = x * Q::from_integer(q as i128);
            if !is_integer(&v) {
                return None;
            }
            s[k] = i64::try_from(*v.numer()).ok()?;
        }
        Some((m, s))
    }

    pub fn describe(&self) -> String {
        let show = |e: &Entries| match e {
            Entries::Exact(v) => v.iter().map(format_q).collect::<Vec<_>>().join(","),
            Entries::Float(v) => v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(","),
        };
        format!("{:?}[{}|{}]", self.kind, show(&self.linear), show(&self.translation))
    }
}

impl PartialEq for GroupElement {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.equals(other)
    }
}
