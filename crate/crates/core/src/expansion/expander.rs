use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::group::{word_products, GeneratorSet};
use crate::space::{saturate, SampledSet, SetPredicate, SpaceModel};
use crate::{Error, Result};

/// Smallest `l` with `(1 + cη/|Q|)^l > 1/η`.
pub fn minimal_word_length(c: f64, eta: f64, q_size: usize) -> Result<u64> {
    if !(c > 0.0 && c < 1.0) || !(eta > 0.0 && eta < 1.0) || q_size == 0 {
        return Err(Error::InvalidArgument(format!("need c, η in (0,1) and |Q| >= 1; got c={c}, η={eta}")));
    }
    let step = (c * eta / q_size as f64).ln_1p();
    let target = (1.0 / eta).ln();
    let mut l = (target / step).floor().max(0.0) as u64;
    // settle rounding at the boundary by direct comparison
    while l as f64 * step <= target {
        l += 1;
    }
    while l > 1 && (l - 1) as f64 * step > target {
        l -= 1;
    }
    Ok(l.max(1))
}

/// `log_5` of `6·5^{|ln η| / ln(1 + η/24)}`.
pub fn lps_size_bound_log5(eta: f64) -> f64 {
    6f64.ln() / 5f64.ln() + eta.ln().abs() / (eta / 24.0).ln_1p()
}

#[derive(Clone, Debug, Serialize)]
pub struct Expander {
    pub l: u64,
    pub c: f64,
    pub eta: f64,
    pub q_size: usize,
    /// `l·ln(1 + cη/|Q|)`, compared against `ln(1/η)`.
    pub growth_log: f64,
    /// `log_5 |Q|^l`, the counting bound on the word set.
    pub counting_bound_log5: f64,
    /// Enumerated word set, absent when only the symbolic description fits.
    #[serde(skip)]
    pub set: Option<GeneratorSet>,
    pub enumerated_size: Option<usize>,
    pub symbolic: bool,
}

/// Words of length exactly `l` for the minimal `l`. When enumeration exceeds
/// `cap` the result is symbolic if `allow_symbolic`, otherwise an error.
pub fn build_expander(q: &GeneratorSet, c: f64, eta: f64, cap: usize, allow_symbolic: bool) -> Result<Expander> {
    if !q.is_symmetric() {
        return Err(Error::InvalidArgument("generator multiset must be symmetric".into()));
    }
    let l = minimal_word_length(c, eta, q.len())?;
    let mut ex = Expander {
        l,
        c,
        eta,
        q_size: q.len(),
        growth_log: l as f64 * (c * eta / q.len() as f64).ln_1p(),
        counting_bound_log5: l as f64 * (q.len() as f64).ln() / 5f64.ln(),
        set: None,
        enumerated_size: None,
        symbolic: true,
    };
    let feasible = (q.len() as f64).powf(l as f64) <= (cap as f64) * 64.0 || l <= 64;
    let enumerated = if feasible { word_products(q, l as usize, cap) } else { Err(Error::SizeCap { what: "word products".into(), cap }) };
    match enumerated {
        Ok(set) => {
            ex.enumerated_size = Some(set.len());
            ex.set = Some(set);
            ex.symbolic = false;
        }
        Err(Error::SizeCap { .. }) if allow_symbolic => {}
        Err(e) => return Err(e),
    }
    Ok(ex)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionRow {
    pub set: String,
    pub mu_u: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub radius: f64,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub eta: f64,
    pub r_size: usize,
    pub mu_c: f64,
    pub rows: Vec<ExpansionRow>,
    pub worst_margin: f64,
    pub pass: bool,
    pub citation: &'static str,
}

impl ExpansionReport {
    /// `(mu(U), mu(R.U ∩ C))` pairs as CSV.
    pub fn plot_csv(&self) -> String {
        let mut s = String::from("mu_u,lhs,rhs,pass\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{}", r.mu_u, r.lhs, r.rhs, r.pass);
        }
        s
    }

    pub fn first_failure(&self) -> Option<&ExpansionRow> {
        self.rows.iter().find(|r| !r.pass)
    }
}

/// Checks `mu(R.U ∩ C) >= min((1-η) mu(C), mu(U)/η)` for each `U` (intersected
/// with `C`). Cloud estimates pass when within their confidence radius.
pub fn verify_expansion(
    model: &Arc<SpaceModel>,
    c: &SampledSet,
    r: &GeneratorSet,
    eta: f64,
    family: &[SetPredicate],
) -> Result<ExpansionReport> {
    let mu_c = c.measure().value;
    let slack = if model.is_exact() { 1e-12 * model.total_mass } else { 0.0 };
    let mut rows = Vec::with_capacity(family.len());
    for p in family {
        let u = SampledSet::from_predicate(model, p)?.intersection(c)?;
        let mu_u = u.measure();
        let lhs = saturate(model, r, &u, c)?;
        let rhs = ((1.0 - eta) * mu_c).min(mu_u.value / eta);
        let margin = lhs.value - rhs;
        rows.push(ExpansionRow {
            set: serde_json::to_string(p)?,
            mu_u: mu_u.value,
            lhs: lhs.value,
            rhs,
            radius: lhs.radius + mu_u.radius / eta,
            margin,
            pass: margin + lhs.radius + mu_u.radius / eta + slack >= 0.0,
        });
    }
    let worst_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    Ok(ExpansionReport {
        eta,
        r_size: r.len(),
        mu_c,
        pass: rows.iter().all(|r| r.pass),
        rows,
        worst_margin,
        citation: "mu(R.U ∩ C) >= min((1-η)mu(C), mu(U)/η)",
    })
}
