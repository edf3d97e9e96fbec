//! Exact rationals and a few floating constants shared across modules.

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::{Error, Result};

/// Exact rational scalar.
pub type Q = Ratio<i128>;

/// Radius of the outer leaf of the annulus, `1 + sqrt(2)/2`.
pub const RHO: f64 = 1.0 + std::f64::consts::SQRT_2 / 2.0;

/// Boundary tolerance for membership tests on sampled geometry.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Two-sided normal quantile for 99% confidence.
pub const Z99: f64 = 2.5758293035489004;

pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn add(a: &Q, b: &Q) -> Result<Q> {
    a.checked_add(b).ok_or(Error::Overflow("rational add"))
}

pub fn sub(a: &Q, b: &Q) -> Result<Q> {
    a.checked_sub(b).ok_or(Error::Overflow("rational sub"))
}

pub fn mul(a: &Q, b: &Q) -> Result<Q> {
    a.checked_mul(b).ok_or(Error::Overflow("rational mul"))
}

/// Reduces a rational into `[0, 1)`.
pub fn frac(x: &Q) -> Q {
    let f = x - Q::from_integer(x.floor().to_integer());
    if f.is_negative() {
        f + Q::one()
    } else {
        f
    }
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|_| bad())?;
            let d: i128 = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_q_vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&format_q(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| parse_q(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Binomial 99% half-width for a proportion `p` estimated from `n` samples.
pub fn binomial_radius(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    Z99 * (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}
