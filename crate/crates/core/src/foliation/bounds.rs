use std::cmp::Ordering;
use std::fmt::Write as _;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use super::params::{composed_expander_params, lps_gap, ComposedParams};
use crate::expansion::minimal_word_length;
use crate::numeric::RHO;

/// Working precision of exponent evaluations, in bits.
pub const PRECISION: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

struct Hp {
    cc: Consts,
}

impl Hp {
    fn new() -> Hp {
        Hp { cc: Consts::new().expect("constant cache") }
    }
    fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, PRECISION)
    }
    fn u(&self, x: u64) -> BigFloat {
        BigFloat::from_u64(x, PRECISION)
    }
    fn big(&mut self, x: &BigUint) -> BigFloat {
        BigFloat::parse(&x.to_string(), Radix::Dec, PRECISION, RM, &mut self.cc)
    }
    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(PRECISION, RM, &mut self.cc)
    }
    fn log2(&mut self, x: &BigFloat) -> BigFloat {
        x.log2(PRECISION, RM, &mut self.cc)
    }
    fn log5(&mut self, x: &BigFloat) -> BigFloat {
        let five = self.u(5);
        let d = self.ln(&five);
        self.ln(x).div(&d, PRECISION, RM)
    }
    fn to_f64(&mut self, x: &BigFloat) -> f64 {
        x.format(Radix::Dec, RM, &mut self.cc)
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(f64::NAN)
    }
    fn to_string(&mut self, x: &BigFloat) -> String {
        x.format(Radix::Dec, RM, &mut self.cc).unwrap_or_else(|_| "NaN".into())
    }
}

fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, PRECISION, RM)
}
fn sub(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.sub(b, PRECISION, RM)
}
fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, PRECISION, RM)
}
fn div(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.div(b, PRECISION, RM)
}
fn lt(a: &BigFloat, b: &BigFloat) -> bool {
    a.cmp(b) == Some(-1)
}

/// An exponent of 5.
#[derive(Clone, Debug)]
pub enum Exponent {
    Exact(BigUint),
    Approx(BigFloat),
}

/// `coefficient · 5^exponent`.
#[derive(Clone, Debug)]
pub struct BigBound {
    pub coefficient: u64,
    pub exponent: Exponent,
}

impl BigBound {
    pub fn exact(coefficient: u64, exponent: BigUint) -> BigBound {
        BigBound { coefficient, exponent: Exponent::Exact(exponent) }
    }

    fn approx(coefficient: u64, exponent: BigFloat) -> BigBound {
        BigBound { coefficient, exponent: Exponent::Approx(exponent) }
    }

    /// `log_5` of the bound.
    pub fn log5(&self) -> BigFloat {
        let mut hp = Hp::new();
        let c = hp.u(self.coefficient.max(1));
        let lc = hp.log5(&c);
        match &self.exponent {
            Exponent::Exact(e) => add(&hp.big(e), &lc),
            Exponent::Approx(e) => add(e, &lc),
        }
    }

    pub fn log5_f64(&self) -> f64 {
        Hp::new().to_f64(&self.log5())
    }

    pub fn exponent_string(&self) -> String {
        match &self.exponent {
            Exponent::Exact(e) => e.to_string(),
            Exponent::Approx(e) => Hp::new().to_string(e),
        }
    }

    pub fn render(&self) -> String {
        format!("{}·5^{}", self.coefficient, self.exponent_string())
    }

    /// Exact when both exponents are integers, else by `log_5` at 256 bits.
    pub fn compare(&self, other: &BigBound) -> Ordering {
        if let (Exponent::Exact(a), Exponent::Exact(b)) = (&self.exponent, &other.exponent) {
            return compare_exact(self.coefficient, a, other.coefficient, b);
        }
        match self.log5().cmp(&other.log5()) {
            Some(x) if x < 0 => Ordering::Less,
            Some(0) => Ordering::Equal,
            _ => Ordering::Greater,
        }
    }
}

fn compare_exact(c1: u64, e1: &BigUint, c2: u64, e2: &BigUint) -> Ordering {
    match e1.cmp(e2) {
        Ordering::Equal => c1.cmp(&c2),
        Ordering::Less => compare_scaled(c1, c2, &(e2 - e1)).reverse_if(false),
        Ordering::Greater => compare_scaled(c2, c1, &(e1 - e2)).reverse(),
    }
}

/// Compares `small` with `large · 5^d` for `d >= 1`.
fn compare_scaled(small: u64, large: u64, d: &BigUint) -> Ordering {
    // 5^28 > u64::MAX >= small, so a big gap settles it
    match d.to_u32() {
        Some(d) if d < 28 => (BigUint::from(small)).cmp(&(BigUint::from(large) * BigUint::from(5u32).pow(d))),
        _ if large == 0 => Ordering::Greater,
        _ => Ordering::Less,
    }
}

trait ReverseIf {
    fn reverse_if(self, yes: bool) -> Self;
}

impl ReverseIf for Ordering {
    fn reverse_if(self, yes: bool) -> Self {
        if yes {
            self.reverse()
        } else {
            self
        }
    }
}

impl Serialize for BigBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("BigBound", 4)?;
        st.serialize_field("coefficient", &self.coefficient)?;
        st.serialize_field("exponent", &self.exponent_string())?;
        st.serialize_field("exact", &matches!(self.exponent, Exponent::Exact(_)))?;
        st.serialize_field("log5", &self.log5_f64())?;
        st.end()
    }
}

/// One row of a constant ledger.
#[derive(Clone, Debug, Serialize)]
pub struct LedgerEntry {
    pub name: String,
    pub value: String,
    pub formula: String,
    pub source: String,
    pub check: Option<bool>,
}

fn entry(name: &str, value: impl ToString, formula: &str, source: &str, check: Option<bool>) -> LedgerEntry {
    LedgerEntry { name: name.into(), value: value.to_string(), formula: formula.into(), source: source.into(), check }
}

pub fn render_markdown(title: &str, entries: &[LedgerEntry]) -> String {
    let mut s = format!("## {title}\n\n| constant | value | formula | source | check |\n|---|---|---|---|---|\n");
    for e in entries {
        let check = match e.check {
            Some(true) => "ok",
            Some(false) => "FAILS",
            None => "",
        };
        let cell = |x: &str| x.replace('|', "\\|");
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            cell(&e.name),
            cell(&e.value.to_string()),
            cell(&e.formula),
            cell(&e.source),
            check
        );
    }
    s
}

/// `|log x| / log(1 + x/24)`, the exponent of the rotation word-set bound.
fn word_exponent(hp: &mut Hp, x: &BigFloat) -> BigFloat {
    let num = hp.ln(x).abs();
    let one = hp.u(1);
    let arg = add(&one, &div(x, &hp.u(24)));
    div(&num, &hp.ln(&arg))
}

/// `3·2³⁷·|log η − 16| / η²` with `log` base 2 and, separately, natural.
fn headline_exponents(hp: &mut Hp, eta: &BigFloat) -> (BigFloat, BigFloat) {
    let coeff = mul(&hp.u(3), &hp.u(1u64 << 37));
    let eta2 = mul(eta, eta);
    let sixteen = hp.u(16);
    let l2 = sub(&hp.log2(eta), &sixteen).abs();
    let ln = sub(&hp.ln(eta), &sixteen).abs();
    (div(&mul(&coeff, &l2), &eta2), div(&mul(&coeff, &ln), &eta2))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainCheck {
    /// `η²/2³² < β` for the quoted `β`.
    pub beta_lower: bool,
    /// `2|ln β| / ln(1 + β/24)` for the quoted `β`.
    pub lhs: f64,
    /// `48·2³²·|4 log₂ η − 64|/η²`.
    pub intermediate: f64,
    /// `3·2³⁷·|log₂ η − 16|/η²`.
    pub rhs: f64,
    pub lhs_le_intermediate: bool,
    pub intermediate_eq_rhs: bool,
    pub lhs_le_rhs: bool,
    /// The same `lhs` with `β = δε/(2M)` as derived from its definition.
    pub lhs_derived_beta: f64,
    pub derived_le_rhs: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeBound {
    pub eta: f64,
    pub params: ComposedParams,
    /// `38·5^{3·2³⁷|log₂ η − 16|/η²}`.
    pub headline_log2: BigBound,
    /// The same expression with natural logarithm.
    pub headline_ln: BigBound,
    /// `log_5` of `36·5^{a+b} + 6·5^a + 6·5^b`, `a`, `b` the word exponents of `β`, `δ`.
    pub three_term_log5: f64,
    /// `log_5` of `38·5^{2a}`.
    pub two_term_log5: f64,
    pub three_lt_two: bool,
    pub word_bound_log5: f64,
    pub chain: ChainCheck,
}

/// Size bound of the composed expanding set for the annulus at `η`.
pub fn expander_size_bound(eta: f64) -> crate::Result<SizeBound> {
    let m = 4.0 * std::f64::consts::PI * RHO * RHO;
    let params = composed_expander_params(eta.min(1.0 - 1e-16), m)?;
    let mut hp = Hp::new();
    let e = hp.f(eta);
    let (h2, hln) = headline_exponents(&mut hp, &e);
    let beta = hp.f(params.beta_stated);
    let delta = hp.f(params.delta_stated);
    let a = word_exponent(&mut hp, &beta);
    let b = word_exponent(&mut hp, &delta);
    // log5(36·5^{a+b} + 6·5^a + 6·5^b) = a + b + log5(36 + 6·5^{-b} + 6·5^{-a})
    let (af, bf) = (hp.to_f64(&a), hp.to_f64(&b));
    let tail = (36.0 + 6.0 * 5f64.powf(-bf) + 6.0 * 5f64.powf(-af)).ln() / 5f64.ln();
    let three = add(&add(&a, &b), &hp.f(tail));
    let c38 = hp.u(38);
    let two = add(&mul(&hp.u(2), &a), &hp.log5(&c38));
    let three_lt_two = lt(&three, &two);

    // chain: 2|ln β|/ln(1+β/24) <= 48·2³²·|4 log₂ η − 64|/η² = 3·2³⁷|log₂ η − 16|/η²
    let lhs = mul(&hp.u(2), &a);
    let eta2 = mul(&e, &e);
    let inner = sub(&mul(&hp.u(4), &hp.log2(&e)), &hp.u(64)).abs();
    let intermediate = div(&mul(&mul(&hp.u(48), &hp.u(1u64 << 32)), &inner), &eta2);
    let beta_lower = lt(&div(&eta2, &hp.u(1u64 << 32)), &beta);
    let derived = hp.f(params.beta);
    let lhs_derived = mul(&hp.u(2), &word_exponent(&mut hp, &derived));
    let rel = |hp: &mut Hp, x: &BigFloat, y: &BigFloat| {
        let d = sub(x, y).abs();
        hp.to_f64(&div(&d, y)) < 1e-60
    };
    let chain = ChainCheck {
        beta_lower,
        lhs: hp.to_f64(&lhs),
        intermediate: hp.to_f64(&intermediate),
        rhs: hp.to_f64(&h2),
        lhs_le_intermediate: !lt(&intermediate, &lhs),
        intermediate_eq_rhs: rel(&mut hp, &intermediate, &h2),
        lhs_le_rhs: !lt(&h2, &lhs),
        lhs_derived_beta: hp.to_f64(&lhs_derived),
        derived_le_rhs: !lt(&h2, &lhs_derived),
    };
    let word = word_exponent(&mut hp, &e);
    let word_bound = add(&word, &hp.log5(&BigFloat::from_u64(6, PRECISION)));
    Ok(SizeBound {
        eta,
        params,
        headline_log2: BigBound::approx(38, h2),
        headline_ln: BigBound::approx(38, hln),
        three_term_log5: hp.to_f64(&three),
        two_term_log5: hp.to_f64(&two),
        three_lt_two,
        word_bound_log5: hp.to_f64(&word_bound),
        chain,
    })
}

impl SizeBound {
    pub fn ledger(&self) -> Vec<LedgerEntry> {
        let p = &self.params;
        let src = "annulus expanding-set size";
        vec![
            entry("M", p.m, "4πρ²", src, None),
            entry("epsilon", p.eps, "η/(3M²)", src, None),
            entry("delta", p.delta, "ε/(4M)", src, Some((p.delta - p.delta_stated).abs() <= 1e-12 * p.delta_stated)),
            entry("delta (quoted)", p.delta_stated, "η/(12M³)", src, None),
            entry("beta (derived)", p.beta, "δε/(2M)", src, None),
            entry("beta (quoted)", p.beta_stated, "η²/(36M⁵)", src, Some((p.beta - p.beta_stated).abs() <= 1e-12 * p.beta_stated)),
            entry("word-set bound log5", self.word_bound_log5, "log5(6) + |log η|/log(1+η/24)", src, None),
            entry("three-term sum log5", self.three_term_log5, "log5(36·5^(a+b) + 6·5^a + 6·5^b)", src, Some(self.three_lt_two)),
            entry("two-term bound log5", self.two_term_log5, "log5(38) + 2|log β|/log(1+β/24)", src, None),
            entry("size bound (closed form)", self.headline_log2.render(), "38·5^{3·2³⁷|log₂ η − 16|/η²}", src, Some(self.chain.lhs_le_rhs)),
            entry("headline exponent (log2)", self.headline_log2.exponent_string(), "3·2³⁷|log₂ η − 16|/η²", src, Some(self.chain.lhs_le_rhs)),
            entry("headline exponent (ln)", self.headline_ln.exponent_string(), "3·2³⁷|ln η − 16|/η²", src, None),
            entry("eta^2/2^32 < beta", self.chain.beta_lower, "quoted β", src, Some(self.chain.beta_lower)),
            entry("48·2³²|4log₂η−64|/η² = 3·2³⁷|log₂η−16|/η²", self.chain.intermediate, "simplification step", src, Some(self.chain.intermediate_eq_rhs)),
            entry("exponent with derived beta", self.chain.lhs_derived_beta, "2|ln β|/ln(1+β/24)", src, Some(self.chain.derived_le_rhs)),
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceBound {
    pub cube_side: f64,
    pub cube_side_from_tangent_sphere: f64,
    pub t_prime: f64,
    pub t_prime_lt_800: bool,
    pub t_size: u64,
    /// `1/(2|T|)` as `(numerator, denominator)`.
    pub eta: (u64, u64),
    pub eta_lt_2_pow_minus_14: bool,
    pub headline_at_eta_log2: String,
    pub headline_at_eta_ln: String,
    /// `3·2³⁷·30·2²⁸`, the exponent after `|log₂ η| < 14` style rounding.
    pub headline_rounded: String,
    pub stated: BigBound,
    pub limit: BigBound,
    pub stated_lt_limit: bool,
    pub exponent_gap: String,
}

/// Piece count for a cube and a ball of equal volume.
pub fn tarski_piece_bound() -> PieceBound {
    let side = 6f64.sqrt() / 6.0;
    let from_sphere = (RHO - 1.0) / 3f64.sqrt();
    let t_prime = (2.0 * RHO / side).powi(3);
    let t_size = 800 * 8;
    let eta = (1u64, 2 * t_size);
    let mut hp = Hp::new();
    let e = div(&hp.u(eta.0), &hp.u(eta.1));
    let (h2, hln) = headline_exponents(&mut hp, &e);
    let two = BigUint::from(2u32);
    let stated_exp = BigUint::from(90u32) * two.pow(60);
    let limit_exp = two.pow(72);
    let stated = BigBound::exact(38, stated_exp.clone());
    let limit = BigBound::exact(1, limit_exp.clone());
    let rounded = BigUint::from(3u32) * two.pow(37) * BigUint::from(30u32) * two.pow(28);
    PieceBound {
        cube_side: side,
        cube_side_from_tangent_sphere: from_sphere,
        t_prime,
        t_prime_lt_800: t_prime < 800.0,
        t_size,
        eta,
        // 1/12800 < 1/2^14  iff  12800 > 2^14
        eta_lt_2_pow_minus_14: eta.1 > 1 << 14,
        headline_at_eta_log2: hp.to_string(&h2),
        headline_at_eta_ln: hp.to_string(&hln),
        headline_rounded: rounded.to_string(),
        stated_lt_limit: stated.compare(&limit) == Ordering::Less,
        exponent_gap: (limit_exp - stated_exp).to_string(),
        stated,
        limit,
    }
}

impl PieceBound {
    pub fn ledger(&self) -> Vec<LedgerEntry> {
        let src = "cube and ball piece count";
        vec![
            entry("cube side", self.cube_side, "√6/6", src, Some((self.cube_side - self.cube_side_from_tangent_sphere).abs() < 1e-12)),
            entry("|T'|", self.t_prime, "(2ρ/(√6/6))³", src, Some(self.t_prime_lt_800)),
            entry("|T|", self.t_size, "800·8", src, Some(self.t_size <= 6400)),
            entry("eta", format!("{}/{}", self.eta.0, self.eta.1), "1/(2|T|)", src, Some(self.eta.1 == 12800)),
            entry("eta < 2^-14", self.eta_lt_2_pow_minus_14, "requires 12800 > 2¹⁴ = 16384", src, Some(self.eta_lt_2_pow_minus_14)),
            entry("headline exponent at eta (log2)", &self.headline_at_eta_log2, "3·2³⁷|log₂ η − 16|/η²", src, None),
            entry("headline exponent at eta (ln)", &self.headline_at_eta_ln, "3·2³⁷|ln η − 16|/η²", src, None),
            entry("headline exponent, |log₂ η| -> 14, 1/η² -> 2²⁸", &self.headline_rounded, "90·2⁶⁵", src, None),
            entry("stated bound", self.stated.render(), "38·5^(90·2⁶⁰)", src, None),
            entry("38·5^(90·2⁶⁰) < 5^(2⁷²)", self.stated_lt_limit, "exact exponent comparison", src, Some(self.stated_lt_limit)),
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SphereRemark {
    pub eta: f64,
    pub gap: f64,
    pub l: u64,
    /// Exact number of distinct products of `l` generators.
    pub count: String,
    pub count_log5: f64,
    pub word_bound_log5: f64,
    pub stated: BigBound,
    pub count_le_stated: bool,
    pub pieces: BigBound,
    pub pieces_is_four_times_set: bool,
}

/// Word-set and piece counts for two half-sphere-containing sets on the sphere.
pub fn sphere_remark() -> crate::Result<SphereRemark> {
    let eta = 1.0 / 6.0;
    let l = minimal_word_length(lps_gap(), eta, 6)?;
    let five = BigUint::from(5u32);
    // products of exactly l letters: 1 + (5/4)(5^l − 1) for even l, (5^{l+1} − 1)/4 for odd l
    let count = if l % 2 == 0 {
        BigUint::one() + (five.pow(l as u32) - 1u32) * 5u32 / 4u32
    } else {
        (five.pow(l as u32 + 1) - 1u32) / 4u32
    };
    let stated = BigBound::exact(6, BigUint::from(277u32));
    let count_le_stated = count <= BigUint::from(6u32) * five.pow(277);
    let mut hp = Hp::new();
    let c = hp.big(&count);
    let count_log5 = hp.log5(&c);
    let e = hp.f(eta);
    let w = word_exponent(&mut hp, &e);
    let wb = add(&w, &hp.log5(&BigFloat::from_u64(6, PRECISION)));
    let pieces = BigBound::exact(24, BigUint::from(277u32));
    Ok(SphereRemark {
        eta,
        gap: lps_gap(),
        l,
        count: count.to_string(),
        count_log5: hp.to_f64(&count_log5),
        word_bound_log5: hp.to_f64(&wb),
        count_le_stated,
        // two half-sphere translates give |T| = 2, pieces <= 2|S||T|
        pieces_is_four_times_set: pieces.coefficient == 4 * stated.coefficient,
        stated,
        pieces,
    })
}

impl SphereRemark {
    pub fn ledger(&self) -> Vec<LedgerEntry> {
        let src = "sphere equidecomposition";
        vec![
            entry("eta", self.eta, "1/6", src, None),
            entry("gap", self.gap, "1 − √5/3", src, None),
            entry("l", self.l, "min l: (1 + cη/6)^l > 1/η", src, None),
            entry("|Q^l| log5", self.count_log5, "exact count", src, Some(self.count_le_stated)),
            entry("word-set bound log5", self.word_bound_log5, "log5(6) + |log η|/log(1+η/24)", src, None),
            entry("stated set size", self.stated.render(), "6·5²⁷⁷", src, None),
            entry("stated pieces", self.pieces.render(), "24·5²⁷⁷ = 2·|T|·6·5²⁷⁷", src, Some(self.pieces_is_four_times_set)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_comparison_handles_small_and_large_gaps() {
        let a = BigBound::exact(38, BigUint::from(10u32));
        let b = BigBound::exact(1, BigUint::from(13u32));
        assert_eq!(a.compare(&b), Ordering::Less);
        let c = BigBound::exact(126, BigUint::from(10u32));
        assert_eq!(c.compare(&b), Ordering::Greater);
        assert_eq!(b.compare(&b), Ordering::Equal);
        let huge = BigBound::exact(u64::MAX, BigUint::from(1u32));
        assert_eq!(huge.compare(&BigBound::exact(1, BigUint::from(100u32))), Ordering::Less);
    }

    #[test]
    fn exact_and_float_comparison_agree() {
        for (c1, e1, c2, e2) in [(3u64, 5u32, 2u64, 5u32), (38, 7, 1, 10), (100, 3, 1, 6), (7, 9, 5000, 5)] {
            let a = BigBound::exact(c1, BigUint::from(e1));
            let b = BigBound::exact(c2, BigUint::from(e2));
            let fa = (c1 as f64).ln() / 5f64.ln() + e1 as f64;
            let fb = (c2 as f64).ln() / 5f64.ln() + e2 as f64;
            assert_eq!(a.compare(&b), fa.partial_cmp(&fb).unwrap());
            assert!((a.log5_f64() - fa).abs() < 1e-12);
        }
    }

    #[test]
    fn headline_is_finite_at_one() {
        let mut hp = Hp::new();
        let one = hp.u(1);
        let (h2, hln) = headline_exponents(&mut hp, &one);
        assert_eq!(hp.to_f64(&h2), 3.0 * 2f64.powi(37) * 16.0);
        assert_eq!(hp.to_f64(&hln), 3.0 * 2f64.powi(37) * 16.0);
    }
}
