use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::element::{ElementKind, GroupElement};
use crate::numeric::{q, qi, Q};
use crate::par::{self, Exec};
use crate::{Error, Result};

pub const GENERATORS_SCHEMA: &str = "equidecomp.generators/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    #[serde(default)]
    pub inverse: bool,
}

/// A word in the alphabet of a generator set. `[a, b]` evaluates to `a·b`,
/// i.e. the map `x -> a.(b.x)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn letter(generator: usize, inverse: bool) -> Self {
        Word { letters: vec![Letter { generator, inverse }] }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.len() + other.len());
        for &l in self.letters.iter().chain(&other.letters) {
            match out.last() {
                Some(p) if p.generator == l.generator && p.inverse != l.inverse => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        Word { letters: out }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .rev()
                .map(|l| Letter { generator: l.generator, inverse: !l.inverse })
                .collect(),
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters
            .windows(2)
            .all(|w| !(w[0].generator == w[1].generator && w[0].inverse != w[1].inverse))
    }

    fn shifted(&self, offset: &[usize]) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .map(|l| Letter { generator: offset[l.generator], inverse: l.inverse })
                .collect(),
        }
    }

    pub fn render(&self, alphabet: &[NamedGenerator]) -> String {
        if self.is_empty() {
            return "e".into();
        }
        self.letters
            .iter()
            .map(|l| {
                let name = alphabet.get(l.generator).map_or("?", |g| g.name.as_str());
                if l.inverse {
                    format!("{name}^-1")
                } else {
                    name.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedGenerator {
    pub name: String,
    pub element: GroupElement,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Member {
    pub word: Word,
    pub element: GroupElement,
}

/// Deduplicating index of group elements. Exact elements are hashed on their
/// entries; floating ones are bucketed on a coarse grid and compared within
/// tolerance.
#[derive(Default)]
pub struct ElementIndex {
    exact: HashMap<Vec<Q>, usize>,
    float: HashMap<[i64; 3], Vec<usize>>,
    elements: Vec<GroupElement>,
}

const BUCKET: f64 = 1e-7;

impl ElementIndex {
    pub fn new() -> Self {
        Self::default()
    }

    fn exact_key(g: &GroupElement) -> Option<Vec<Q>> {
        let mut k = g.linear.exact()?.to_vec();
        k.extend_from_slice(g.translation.exact()?);
        Some(k)
    }

    fn cell(g: &GroupElement) -> [i64; 3] {
        let f = g.linear_f64();
        [0, 1, 2].map(|i| (f[i] / BUCKET).round() as i64)
    }

    pub fn find(&self, g: &GroupElement) -> Option<usize> {
        if let Some(k) = Self::exact_key(g) {
            return self.exact.get(&k).copied();
        }
        let c = Self::cell(g);
        for d0 in -1..=1 {
            for d1 in -1..=1 {
                for d2 in -1..=1 {
                    if let Some(ids) = self.float.get(&[c[0] + d0, c[1] + d1, c[2] + d2]) {
                        if let Some(&i) = ids.iter().find(|&&i| self.elements[i].equals(g)) {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    /// Returns the index of `g` and whether it was newly inserted.
    pub fn insert(&mut self, g: &GroupElement) -> (usize, bool) {
        if let Some(i) = self.find(g) {
            return (i, false);
        }
        let i = self.elements.len();
        match Self::exact_key(g) {
            Some(k) => {
                self.exact.insert(k, i);
            }
            None => self.float.entry(Self::cell(g)).or_default().push(i),
        }
        self.elements.push(g.clone());
        (i, true)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// A finite multiset of group elements, each carrying the generator word that
/// produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub schema: String,
    pub kind: ElementKind,
    pub dim: usize,
    pub alphabet: Vec<NamedGenerator>,
    pub members: Vec<Member>,
    /// Set when the multiset was built to be closed under inversion.
    pub symmetric: bool,
}

impl GeneratorSet {
    pub fn empty(kind: ElementKind, dim: usize) -> Self {
        GeneratorSet {
            schema: GENERATORS_SCHEMA.into(),
            kind,
            dim,
            alphabet: Vec::new(),
            members: Vec::new(),
            symmetric: true,
        }
    }

    /// Members are the generators, followed by their inverses when
    /// `with_inverses` is set (interleaved `g, g^-1`).
    pub fn from_alphabet(alphabet: Vec<NamedGenerator>, with_inverses: bool) -> Result<Self> {
        let first = alphabet
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty alphabet".into()))?;
        let (kind, dim) = (first.element.kind, first.element.dim);
        let mut members = Vec::new();
        for (i, g) in alphabet.iter().enumerate() {
            if g.element.dim != dim {
                return Err(Error::Dimension("mixed dimensions in alphabet".into()));
            }
            members.push(Member { word: Word::letter(i, false), element: g.element.clone() });
            if with_inverses {
                members.push(Member { word: Word::letter(i, true), element: g.element.inverse()? });
            }
        }
        let mut s = GeneratorSet {
            schema: GENERATORS_SCHEMA.into(),
            kind,
            dim,
            alphabet,
            members,
            symmetric: with_inverses,
        };
        s.kind = s.joint_kind()?;
        Ok(s)
    }

    fn joint_kind(&self) -> Result<ElementKind> {
        let mut acc = GroupElement::identity(self.kind, self.dim);
        for g in &self.alphabet {
            acc = acc.compose(&GroupElement::identity(g.element.kind, g.element.dim))?;
        }
        Ok(acc.kind)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = &GroupElement> {
        self.members.iter().map(|m| &m.element)
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.kind, self.dim)
    }

    /// Evaluates a word over this set's alphabet.
    pub fn evaluate(&self, w: &Word) -> Result<GroupElement> {
        let mut acc = self.identity();
        for l in &w.letters {
            let g = &self
                .alphabet
                .get(l.generator)
                .ok_or_else(|| Error::InvalidArgument(format!("letter {} out of range", l.generator)))?
                .element;
            acc = if l.inverse { acc.compose(&g.inverse()?)? } else { acc.compose(g)? };
        }
        Ok(acc)
    }

    pub fn render(&self, w: &Word) -> String {
        w.render(&self.alphabet)
    }

    pub fn contains_identity(&self) -> bool {
        self.elements().any(GroupElement::is_identity)
    }

    /// Multiplicity of every element equals that of its inverse.
    pub fn is_symmetric(&self) -> bool {
        let mut idx = ElementIndex::new();
        let mut count: Vec<i64> = Vec::new();
        let mut class = Vec::with_capacity(self.len());
        for g in self.elements() {
            let (i, fresh) = idx.insert(g);
            if fresh {
                count.push(0);
            }
            count[i] += 1;
            class.push(i);
        }
        self.members.iter().zip(&class).all(|(m, &c)| match m.element.inverse() {
            Ok(inv) => idx.find(&inv).is_some_and(|j| count[j] == count[c]),
            Err(_) => false,
        })
    }

    /// Alphabet of `self` extended by that of `other`; returns the letter
    /// remapping for `other`'s words.
    fn merged_alphabet(&self, other: &GeneratorSet) -> (Vec<NamedGenerator>, Vec<usize>) {
        let mut alphabet = self.alphabet.clone();
        let map = other
            .alphabet
            .iter()
            .map(|g| {
                match alphabet
                    .iter()
                    .position(|h| h.name == g.name && h.element.equals(&g.element))
                {
                    Some(i) => i,
                    None => {
                        alphabet.push(g.clone());
                        alphabet.len() - 1
                    }
                }
            })
            .collect();
        (alphabet, map)
    }

    fn check_compatible(&self, other: &GeneratorSet) -> Result<ElementKind> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        Ok(GroupElement::identity(self.kind, self.dim)
            .compose(&GroupElement::identity(other.kind, other.dim))?
            .kind)
    }

    /// Deduplicated union.
    pub fn union(&self, other: &GeneratorSet) -> Result<GeneratorSet> {
        let kind = self.check_compatible(other)?;
        let (alphabet, map) = self.merged_alphabet(other);
        let mut idx = ElementIndex::new();
        let mut members = Vec::new();
        let ids: Vec<usize> = (0..self.alphabet.len()).collect();
        for (m, offs) in self
            .members
            .iter()
            .map(|m| (m, &ids))
            .chain(other.members.iter().map(|m| (m, &map)))
        {
            if idx.insert(&m.element).1 {
                members.push(Member { word: m.word.shifted(offs), element: m.element.clone() });
            }
        }
        let mut out = GeneratorSet { schema: GENERATORS_SCHEMA.into(), kind, dim: self.dim, alphabet, members, symmetric: false };
        out.symmetric = self.symmetric && other.symmetric && out.is_symmetric();
        Ok(out)
    }

    /// Deduplicated product set `{s t : s in self, t in other}`.
    pub fn product(&self, other: &GeneratorSet, cap: usize) -> Result<GeneratorSet> {
        let kind = self.check_compatible(other)?;
        let (alphabet, map) = self.merged_alphabet(other);
        let ids: Vec<usize> = (0..self.alphabet.len()).collect();
        let mut idx = ElementIndex::new();
        let mut members = Vec::new();
        for s in &self.members {
            let row = par::map_slice(Exec::Parallel, &other.members, |t| s.element.compose(&t.element));
            for (t, st) in other.members.iter().zip(row) {
                let st = st?;
                if idx.insert(&st).1 {
                    if members.len() >= cap {
                        return Err(Error::SizeCap { what: "product set".into(), cap });
                    }
                    let w = s.word.shifted(&ids).concat(&t.word.shifted(&map));
                    members.push(Member { word: w, element: st });
                }
            }
        }
        Ok(GeneratorSet { schema: GENERATORS_SCHEMA.into(), kind, dim: self.dim, alphabet, members, symmetric: false })
    }

    /// Deduplicated set closed under inversion and containing the identity.
    pub fn symmetrized_with_identity(&self) -> Result<GeneratorSet> {
        let mut idx = ElementIndex::new();
        let mut members = Vec::new();
        let mut push = |w: Word, g: GroupElement, members: &mut Vec<Member>| {
            if idx.insert(&g).1 {
                members.push(Member { word: w, element: g });
            }
        };
        push(Word::empty(), self.identity(), &mut members);
        for m in &self.members {
            push(m.word.clone(), m.element.clone(), &mut members);
            push(m.word.inverse(), m.element.inverse()?, &mut members);
        }
        Ok(GeneratorSet { members, symmetric: true, ..self.clone() })
    }

    /// Replays every word and checks it evaluates to the stored element.
    pub fn check_words(&self) -> Result<()> {
        for m in &self.members {
            m.element.check_invariants()?;
            if !self.evaluate(&m.word)?.equals(&m.element) {
                return Err(Error::InvalidElement(format!(
                    "word {} does not evaluate to its element",
                    self.render(&m.word)
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<GeneratorSet> {
        let g: GeneratorSet = serde_json::from_str(s)?;
        if g.schema != GENERATORS_SCHEMA {
            return Err(Error::InvalidArgument(format!("unknown schema {:?}", g.schema)));
        }
        g.check_words()?;
        Ok(g)
    }
}

/// Products of exactly `l` letters from `q`, deduplicated, with provenance
/// words. Fails once the running set exceeds `cap`.
pub fn word_products(qs: &GeneratorSet, l: usize, cap: usize) -> Result<GeneratorSet> {
    if l == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let mut level = dedup(qs, cap)?;
    for _ in 1..l {
        level = level.product(qs, cap)?;
        level.alphabet = qs.alphabet.clone();
    }
    level.symmetric = qs.symmetric && level.is_symmetric();
    Ok(level)
}

fn dedup(qs: &GeneratorSet, cap: usize) -> Result<GeneratorSet> {
    let mut idx = ElementIndex::new();
    let mut members = Vec::new();
    for m in &qs.members {
        if idx.insert(&m.element).1 {
            if members.len() >= cap {
                return Err(Error::SizeCap { what: "word products".into(), cap });
            }
            members.push(m.clone());
        }
    }
    Ok(GeneratorSet { members, ..qs.clone() })
}

/// All freely reduced words of length exactly `l` in the alphabet of `qs`
/// and its inverses, evaluated and deduplicated. For a free basis the count is
/// `2k(2k-1)^(l-1)`.
pub fn reduced_words(qs: &GeneratorSet, l: usize, cap: usize) -> Result<GeneratorSet> {
    let k = qs.alphabet.len();
    let letters: Vec<(Letter, GroupElement)> = (0..k)
        .flat_map(|g| [false, true].map(|inv| (g, inv)))
        .map(|(g, inv)| {
            let e = &qs.alphabet[g].element;
            Ok((Letter { generator: g, inverse: inv }, if inv { e.inverse()? } else { e.clone() }))
        })
        .collect::<Result<_>>()?;
    let mut level: Vec<(Word, GroupElement)> = vec![(Word::empty(), qs.identity())];
    for _ in 0..l {
        let mut next = Vec::new();
        for (w, g) in &level {
            for (letter, e) in &letters {
                let cancels = w
                    .letters
                    .last()
                    .is_some_and(|p| p.generator == letter.generator && p.inverse != letter.inverse);
                if !cancels {
                    let mut w2 = w.clone();
                    w2.letters.push(*letter);
                    next.push((w2, g.compose(e)?));
                }
            }
            if next.len() > cap {
                return Err(Error::SizeCap { what: "reduced words".into(), cap });
            }
        }
        level = next;
    }
    let mut idx = ElementIndex::new();
    let members = level
        .into_iter()
        .filter(|(_, g)| idx.insert(g).1)
        .map(|(word, element)| Member { word, element })
        .collect();
    Ok(GeneratorSet { members, symmetric: true, ..qs.clone() })
}

/// Rotation of `R^3` attached to the quaternion `a + bi + cj + dk`.
fn quaternion_rotation(a: i128, b: i128, c: i128, d: i128) -> Result<GroupElement> {
    let n = a * a + b * b + c * c + d * d;
    let m = [
        a * a + b * b - c * c - d * d,
        2 * (b * c - a * d),
        2 * (b * d + a * c),
        2 * (b * c + a * d),
        a * a - b * b + c * c - d * d,
        2 * (c * d - a * b),
        2 * (b * d - a * c),
        2 * (c * d + a * b),
        a * a - b * b - c * c + d * d,
    ];
    GroupElement::rotation_exact(m.iter().map(|&x| q(x, n)).collect())
}

/// The six rotations from the norm-5 quaternions `1 ± 2i, 1 ± 2j, 1 ± 2k`.
pub fn lps_generators() -> GeneratorSet {
    let alphabet = [("a", (1, 2, 0, 0)), ("b", (1, 0, 2, 0)), ("c", (1, 0, 0, 2))]
        .into_iter()
        .map(|(name, (w, x, y, z))| NamedGenerator {
            name: name.into(),
            element: quaternion_rotation(w, x, y, z).expect("norm-5 quaternion rotations are exact"),
        })
        .collect();
    GeneratorSet::from_alphabet(alphabet, true).expect("nonempty alphabet")
}

/// `S = [[0,-1],[1,0]]`, `T = [[1,1],[0,1]]` and their inverses, acting on the torus.
pub fn sl2z_generators() -> GeneratorSet {
    let z = [qi(0), qi(0)];
    let alphabet = vec![
        NamedGenerator { name: "S".into(), element: GroupElement::torus([[0, -1], [1, 0]], z).unwrap() },
        NamedGenerator { name: "T".into(), element: GroupElement::torus([[1, 1], [0, 1]], z).unwrap() },
    ];
    GeneratorSet::from_alphabet(alphabet, true).unwrap()
}

/// Translations by `1/q` along both torus axes, with inverses.
pub fn torus_translations(q_: u64) -> Result<GeneratorSet> {
    if q_ == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    let step = q(1, q_ as i128);
    let alphabet = vec![
        NamedGenerator { name: "x".into(), element: GroupElement::torus_translation([step, qi(0)])? },
        NamedGenerator { name: "y".into(), element: GroupElement::torus_translation([qi(0), step])? },
    ];
    GeneratorSet::from_alphabet(alphabet, true)
}

/// Torus translations by the given vectors, as a set (no inverses added).
pub fn torus_translation_set(vectors: &[[Q; 2]]) -> Result<GeneratorSet> {
    let alphabet = vectors
        .iter()
        .enumerate()
        .map(|(i, t)| Ok(NamedGenerator { name: format!("t{i}"), element: GroupElement::torus_translation(*t)? }))
        .collect::<Result<Vec<_>>>()?;
    GeneratorSet::from_alphabet(alphabet, false)
}

/// Planar translations by the given vectors (kind affine), no inverses added.
pub fn plane_translations(vectors: &[[Q; 2]]) -> Result<GeneratorSet> {
    let alphabet = vectors
        .iter()
        .enumerate()
        .map(|(i, t)| {
            Ok(NamedGenerator {
                name: format!("t{i}"),
                element: GroupElement::affine_exact(2, vec![qi(1), qi(0), qi(0), qi(1)], t.to_vec())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = GeneratorSet::from_alphabet(alphabet, false)?;
    s.symmetric = s.is_symmetric();
    Ok(s)
}

/// `k` copies of the identity.
pub fn identity_multiset(kind: ElementKind, dim: usize, k: usize) -> GeneratorSet {
    let mut s = GeneratorSet::empty(kind, dim);
    s.members = (0..k)
        .map(|_| Member { word: Word::empty(), element: GroupElement::identity(kind, dim) })
        .collect();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
        let mut out = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = qi(0);
                for k in 0..3 {
                    s += a[3 * i + k] * b[3 * k + j];
                }
                out.push(s);
            }
        }
        out
    }

    #[test]
    fn lps_basic_shape() {
        let g = lps_generators();
        assert_eq!(g.len(), 6);
        assert!(g.is_symmetric());
        for m in &g.members {
            m.element.check_invariants().unwrap();
            assert!(m.element.linear.exact().unwrap().iter().all(|x| (x * qi(5)).is_integer()));
        }
        let a = g.members[0].element.linear.exact().unwrap();
        assert_eq!(a, &[qi(1), qi(0), qi(0), qi(0), q(-3, 5), q(-4, 5), qi(0), q(4, 5), q(-3, 5)]);
    }

    #[test]
    fn compose_matches_naive_product() {
        let g = lps_generators();
        for x in g.elements() {
            for y in g.elements() {
                let xy = x.compose(y).unwrap();
                let n = naive_mul(x.linear.exact().unwrap(), y.linear.exact().unwrap());
                assert_eq!(xy.linear.exact().unwrap(), &n[..]);
            }
        }
    }

    #[test]
    fn lps_word_counts() {
        let g = lps_generators();
        assert_eq!(word_products(&g, 1, 1 << 20).unwrap().len(), 6);
        for l in 1..=5usize {
            let red = reduced_words(&g, l, 1 << 20).unwrap();
            assert_eq!(red.len(), 6 * 5usize.pow(l as u32 - 1), "l = {l}");
            // exactly-l products also hit every shorter reduced word of the same parity
            let expected: usize = (0..=l)
                .filter(|k| (l - k) % 2 == 0)
                .map(|k| if k == 0 { 1 } else { 6 * 5usize.pow(k as u32 - 1) })
                .sum();
            let prod = word_products(&g, l, 1 << 20).unwrap();
            assert_eq!(prod.len(), expected, "l = {l}");
            assert!(prod.len() <= 6usize.pow(l as u32));
            assert!(prod.is_symmetric());
            prod.check_words().unwrap();
        }
    }

    #[test]
    fn size_cap_is_enforced() {
        let g = lps_generators();
        assert!(matches!(word_products(&g, 4, 50), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn generator_json_round_trip() {
        let g = word_products(&lps_generators(), 3, 1000).unwrap();
        let s = g.to_json().unwrap();
        let h = GeneratorSet::from_json(&s).unwrap();
        assert_eq!(s, h.to_json().unwrap());
        for (a, b) in g.elements().zip(h.elements()) {
            assert_eq!(a.linear.exact(), b.linear.exact());
        }
    }

    #[test]
    fn words_reduce_freely() {
        let w = Word::letter(0, false).concat(&Word::letter(1, true));
        assert_eq!(w.concat(&w.inverse()), Word::empty());
        assert!(w.is_reduced());
    }

    #[test]
    fn identity_multiset_products_collapse() {
        let e = identity_multiset(ElementKind::TorusAutomorphism, 2, 2);
        assert!(e.is_symmetric());
        assert_eq!(word_products(&e, 3, 10).unwrap().len(), 1);
    }

    #[test]
    fn union_and_product_track_words() {
        let s = sl2z_generators();
        let t = torus_translations(5).unwrap();
        let u = s.union(&t).unwrap();
        assert_eq!(u.len(), 8);
        assert!(u.is_symmetric());
        let p = t.product(&s, 100).unwrap();
        p.check_words().unwrap();
        assert_eq!(p.len(), 16);
    }
}
