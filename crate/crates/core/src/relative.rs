//! Relative words over `H * F(X)`: cyclic reduction, the `*_x` closure,
//! orientability, and the augmentation of a free-product element.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

use crate::freeprod::{FiniteGroup, FpElement, FreeProduct, FreeProductError};
use crate::words::{Alphabet, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelativeError {
    #[error("free-product length {0} is below 2")]
    SyllableLengthTooSmall(usize),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error(transparent)]
    FreeProduct(#[from] FreeProductError),
}

/// A concrete group in which the coefficient parts of relative words live.
pub trait GroupBackend {
    type Elem: Clone + Eq + Ord + Hash + Debug;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Self::Elem;
    fn parse_elem(&self, text: &str) -> Result<Self::Elem, String>;
    fn format_elem(&self, a: &Self::Elem) -> String;

    fn is_identity(&self, a: &Self::Elem) -> bool {
        *a == self.identity()
    }
}

impl GroupBackend for FiniteGroup {
    type Elem = usize;

    fn identity(&self) -> usize {
        FiniteGroup::identity(self)
    }

    fn mul(&self, a: &usize, b: &usize) -> usize {
        FiniteGroup::mul(self, *a, *b)
    }

    fn inverse(&self, a: &usize) -> usize {
        self.inv(*a)
    }

    fn parse_elem(&self, text: &str) -> Result<usize, String> {
        let mut acc = FiniteGroup::identity(self);
        for tok in text.split_whitespace() {
            let x = self.names().iter().position(|n| n == tok).ok_or_else(|| format!("unknown element `{tok}`"))?;
            acc = FiniteGroup::mul(self, acc, x);
        }
        Ok(acc)
    }

    fn format_elem(&self, a: &usize) -> String {
        self.names()[*a].clone()
    }
}

/// The free group on an alphabet, elements kept freely reduced.
#[derive(Debug, Clone)]
pub struct FreeGroup {
    pub alphabet: Alphabet,
}

impl GroupBackend for FreeGroup {
    type Elem = Word;

    fn identity(&self) -> Word {
        Word::identity()
    }

    fn mul(&self, a: &Word, b: &Word) -> Word {
        a.mul(b)
    }

    fn inverse(&self, a: &Word) -> Word {
        a.inverse()
    }

    fn parse_elem(&self, text: &str) -> Result<Word, String> {
        if text.trim() == "1" {
            return Ok(Word::identity());
        }
        self.alphabet.parse(text).map(|w| crate::words::reduce(&w)).map_err(|e| e.to_string())
    }

    fn format_elem(&self, a: &Word) -> String {
        if a.is_empty() {
            "1".into()
        } else {
            self.alphabet.format(a)
        }
    }
}

impl GroupBackend for FreeProduct {
    type Elem = FpElement;

    fn identity(&self) -> FpElement {
        FpElement::identity()
    }

    fn mul(&self, a: &FpElement, b: &FpElement) -> FpElement {
        FreeProduct::mul(self, a, b).expect("backend elements are validated on entry")
    }

    fn inverse(&self, a: &FpElement) -> FpElement {
        FreeProduct::inverse(self, a).expect("backend elements are validated on entry")
    }

    fn parse_elem(&self, text: &str) -> Result<FpElement, String> {
        if text.trim() == "1" {
            return Ok(FpElement::identity());
        }
        let e = self.parse_element(text).map_err(|e| e.to_string())?;
        self.normal_form(&e).map_err(|e| e.to_string())
    }

    fn format_elem(&self, a: &FpElement) -> String {
        self.format(a)
    }
}

/// One block `x^ε h` of a relative word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelSyllable<E> {
    pub x: usize,
    pub sign: i8,
    pub h: E,
}

/// `head · x₁^ε₁ h₁ x₂^ε₂ h₂ … xₙ^εₙ hₙ`. The head only matters when a word
/// has no X-syllables left; cyclic operations fold it into `hₙ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelativeWord<E> {
    pub head: E,
    pub syllables: Vec<RelSyllable<E>>,
}

impl<E: Clone + Eq> RelativeWord<E> {
    pub fn new(head: E, syllables: Vec<RelSyllable<E>>) -> Self {
        RelativeWord { head, syllables }
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Cyclic rotation by `k` syllables.
    pub fn rotate(&self, k: usize) -> Self {
        let n = self.syllables.len();
        let mut s = self.syllables.clone();
        if n > 0 {
            s.rotate_left(k % n);
        }
        RelativeWord { head: self.head.clone(), syllables: s }
    }
}

fn absorb_head<B: GroupBackend>(g: &B, w: &RelativeWord<B::Elem>) -> RelativeWord<B::Elem> {
    let mut w = w.clone();
    if let Some(last) = w.syllables.last_mut() {
        if !g.is_identity(&w.head) {
            last.h = g.mul(&last.h, &w.head);
            w.head = g.identity();
        }
    }
    w
}

fn violation_at<B: GroupBackend>(g: &B, s: &[RelSyllable<B::Elem>], i: usize) -> bool {
    let n = s.len();
    let j = (i + 1) % n;
    n >= 2 && g.is_identity(&s[i].h) && s[i].x == s[j].x && s[i].sign != s[j].sign
}

/// True when no `xᵢ^ε 1 xᵢ^-ε` occurs, indices read cyclically.
pub fn is_rel_cyclically_reduced<B: GroupBackend>(g: &B, w: &RelativeWord<B::Elem>) -> bool {
    let w = absorb_head(g, w);
    (0..w.syllables.len()).all(|i| !violation_at(g, &w.syllables, i))
}

/// Cyclically cancels `x^ε 1 x^-ε` patterns, multiplying the neighbouring
/// H-parts together, until none remain.
pub fn rel_cyclic_reduce<B: GroupBackend>(g: &B, w: &RelativeWord<B::Elem>) -> RelativeWord<B::Elem> {
    let mut w = absorb_head(g, w);
    loop {
        let n = w.syllables.len();
        let Some(i) = (0..n).find(|&i| violation_at(g, &w.syllables, i)) else {
            return w;
        };
        let j = (i + 1) % n;
        if n == 2 {
            let h = w.syllables[j].h.clone();
            return RelativeWord { head: h, syllables: Vec::new() };
        }
        let prev = (i + n - 1) % n;
        let carry = w.syllables[j].h.clone();
        w.syllables[prev].h = g.mul(&w.syllables[prev].h, &carry);
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        w.syllables.remove(hi);
        w.syllables.remove(lo);
    }
}

/// Non-cyclic reduction in `H * F(X)`: cancels `x^ε 1 x^-ε` and merges the
/// surrounding H-parts. Two words are equal in the product iff their
/// reductions coincide.
pub fn rel_free_reduce<B: GroupBackend>(g: &B, w: &RelativeWord<B::Elem>) -> RelativeWord<B::Elem> {
    let mut head = w.head.clone();
    let mut out: Vec<RelSyllable<B::Elem>> = Vec::new();
    for s in &w.syllables {
        match out.last() {
            Some(top) if g.is_identity(&top.h) && top.x == s.x && top.sign != s.sign => {
                out.pop();
                match out.last_mut() {
                    Some(t) => t.h = g.mul(&t.h, &s.h),
                    None => head = g.mul(&head, &s.h),
                }
            }
            _ => out.push(s.clone()),
        }
    }
    RelativeWord { head, syllables: out }
}

pub fn rel_equal<B: GroupBackend>(g: &B, a: &RelativeWord<B::Elem>, b: &RelativeWord<B::Elem>) -> bool {
    rel_free_reduce(g, a) == rel_free_reduce(g, b)
}

/// Inverse rewritten so it again starts with an X-symbol (cyclically).
pub fn rel_inverse<B: GroupBackend>(g: &B, w: &RelativeWord<B::Elem>) -> RelativeWord<B::Elem> {
    let w = absorb_head(g, w);
    let n = w.syllables.len();
    if n == 0 {
        return RelativeWord { head: g.inverse(&w.head), syllables: Vec::new() };
    }
    let syllables = (0..n)
        .map(|k| {
            let i = n - 1 - k;
            let prev = (i + n - 1) % n;
            RelSyllable { x: w.syllables[i].x, sign: -w.syllables[i].sign, h: g.inverse(&w.syllables[prev].h) }
        })
        .collect();
    RelativeWord { head: g.identity(), syllables }
}

fn rotations<E: Clone + Eq>(w: &RelativeWord<E>) -> impl Iterator<Item = RelativeWord<E>> + '_ {
    (0..w.syllables.len()).map(move |k| w.rotate(k))
}

/// All cyclic permutations of `S ∪ S⁻¹` beginning with an X-symbol.
pub fn star_x<B: GroupBackend>(g: &B, set: &[RelativeWord<B::Elem>]) -> BTreeSet<RelativeWord<B::Elem>> {
    let mut out = BTreeSet::new();
    for r in set {
        let r = absorb_head(g, r);
        let ri = rel_inverse(g, &r);
        out.extend(rotations(&r));
        out.extend(rotations(&ri));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrientabilityViolation {
    /// Relator `other` lies in the `*_x` closure of relator `index`.
    SharedClosure { index: usize, other: usize },
    /// Relator `index` is a cyclic permutation of its own inverse.
    SelfInverse { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientability {
    pub orientable: bool,
    pub violation: Option<OrientabilityViolation>,
}

pub fn check_orientable<B: GroupBackend>(g: &B, rels: &[RelativeWord<B::Elem>]) -> Orientability {
    let rels: Vec<_> = rels.iter().map(|r| absorb_head(g, r)).collect();
    for (i, r) in rels.iter().enumerate() {
        let closure = star_x(g, std::slice::from_ref(r));
        if let Some(j) = rels.iter().enumerate().position(|(j, s)| j != i && s != r && closure.contains(s)) {
            return Orientability { orientable: false, violation: Some(OrientabilityViolation::SharedClosure { index: i, other: j }) };
        }
        let ri = rel_inverse(g, r);
        if !r.is_empty() && rotations(&ri).any(|x| &x == r) {
            return Orientability { orientable: false, violation: Some(OrientabilityViolation::SelfInverse { index: i }) };
        }
    }
    Orientability { orientable: true, violation: None }
}

/// `u = u₁u₂…uₙ` becomes `x_{i₁} u₁ x_{i₁}⁻¹ 1 x_{i₂} u₂ x_{i₂}⁻¹ 1 …`, where
/// `x_i` is the X-generator attached to factor `i`.
pub fn augment(fp: &FreeProduct, u: &FpElement) -> Result<RelativeWord<FpElement>, RelativeError> {
    if !fp.is_normal_form(u) {
        return Err(FreeProductError::NotNormalForm.into());
    }
    if u.len() < 2 {
        return Err(RelativeError::SyllableLengthTooSmall(u.len()));
    }
    let mut syllables = Vec::with_capacity(2 * u.len());
    for s in &u.syllables {
        syllables.push(RelSyllable { x: s.factor, sign: 1, h: FpElement::single(s.factor, s.elem) });
        syllables.push(RelSyllable { x: s.factor, sign: -1, h: FpElement::identity() });
    }
    Ok(RelativeWord { head: FpElement::identity(), syllables })
}

/// Names `x1, x2, …` for the augmentation generators, one per factor.
pub fn augment_alphabet(fp: &FreeProduct) -> Alphabet {
    let names: Vec<String> = (1..=fp.factors().len()).map(|i| format!("x{i}")).collect();
    Alphabet::new(&names).expect("generated names are valid")
}

/// Parses `{h0} x {h1} y^-1 {h2} …`; a missing block stands for the identity.
pub fn parse_relative<B: GroupBackend>(g: &B, xs: &Alphabet, text: &str) -> Result<RelativeWord<B::Elem>, RelativeError> {
    let mut head = g.identity();
    let mut syllables: Vec<RelSyllable<B::Elem>> = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    let err = |col: usize, msg: String| RelativeError::Parse { col: col + 1, msg };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c == '{' {
            let close = text[i..].find('}').ok_or_else(|| err(i, "unclosed `{`".into()))? + i;
            let h = g.parse_elem(&text[i + 1..close]).map_err(|m| err(i, m))?;
            match syllables.last_mut() {
                Some(s) => s.h = g.mul(&s.h, &h),
                None => head = g.mul(&head, &h),
            }
            i = close + 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let name = &text[start..i];
            let x = xs.index(name).ok_or_else(|| err(start, format!("unknown generator `{name}`")))?;
            let mut sign = 1;
            if text[i..].starts_with("^-1") {
                sign = -1;
                i += 3;
            } else if text[i..].starts_with("^1") {
                i += 2;
            } else if text[i..].starts_with('^') {
                return Err(err(i, "exponent must be 1 or -1".into()));
            }
            syllables.push(RelSyllable { x, sign, h: g.identity() });
        } else {
            return Err(err(i, format!("unexpected `{c}`")));
        }
    }
    Ok(RelativeWord { head, syllables })
}

pub fn format_relative<B: GroupBackend>(g: &B, xs: &Alphabet, w: &RelativeWord<B::Elem>) -> String {
    let mut parts = Vec::new();
    if !g.is_identity(&w.head) || w.syllables.is_empty() {
        parts.push(format!("{{{}}}", g.format_elem(&w.head)));
    }
    for s in &w.syllables {
        let x = xs.name(s.x);
        parts.push(if s.sign < 0 { format!("{x}^-1") } else { x.to_string() });
        if !g.is_identity(&s.h) {
            parts.push(format!("{{{}}}", g.format_elem(&s.h)));
        }
    }
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freeprod::{FactorElement, FactorGroup};

    fn z4() -> FiniteGroup {
        FiniteGroup::cyclic(4, "a")
    }

    fn xy() -> Alphabet {
        Alphabet::new(&["x", "y"]).unwrap()
    }

    #[test]
    fn cyclic_reduce_examples() {
        let g = z4();
        let xs = xy();
        let p = |s: &str| parse_relative(&g, &xs, s).unwrap();
        let r = rel_cyclic_reduce(&g, &p("x {1} x^-1"));
        assert!(r.is_empty());
        assert!(g.is_identity(&r.head));

        let r = rel_cyclic_reduce(&g, &p("x {a} x^-1 x {a}"));
        assert_eq!(r, p("x {a2}"));

        let w = p("x {a} y {a}");
        assert_eq!(rel_cyclic_reduce(&g, &w), w);
        assert!(is_rel_cyclically_reduced(&g, &w));
    }

    #[test]
    fn star_x_examples() {
        let g = z4();
        let xs = xy();
        let p = |s: &str| parse_relative(&g, &xs, s).unwrap();
        let s = star_x(&g, &[p("x {a}")]);
        assert_eq!(s.len(), 2);
        assert!(s.contains(&p("x^-1 {a3}")));
        assert!(star_x(&g, &[]).is_empty());
        let s = star_x(&g, &[p("x {a} y {a2}")]);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|w| !w.is_empty()));
    }

    #[test]
    fn orientability_examples() {
        let g = z4();
        let xs = xy();
        let p = |s: &str| parse_relative(&g, &xs, s).unwrap();
        assert!(check_orientable(&g, &[p("x {a}"), p("y {a2}")]).orientable);
        let o = check_orientable(&g, &[p("x"), p("x^-1")]);
        assert_eq!(o.violation, Some(OrientabilityViolation::SharedClosure { index: 0, other: 1 }));
        let o = check_orientable(&g, &[p("x {a2} x^-1 {a2}")]);
        assert_eq!(o.violation, Some(OrientabilityViolation::SelfInverse { index: 0 }));
        assert!(check_orientable(&g, &[p("x {a} x^-1 {a}")]).orientable);
    }

    #[test]
    fn augment_examples() {
        let fp = FreeProduct::new(vec![
            FactorGroup::Finite(FiniteGroup::cyclic(2, "a")),
            FactorGroup::Finite(FiniteGroup::cyclic(3, "b")),
        ]);
        let xs = augment_alphabet(&fp);
        let u = fp.parse_element("a b").unwrap();
        let w = augment(&fp, &u).unwrap();
        assert_eq!(format_relative(&fp, &xs, &w), "x1 {a} x1^-1 x2 {b} x2^-1");
        let u3 = fp.parse_element("a b a").unwrap();
        assert_eq!(augment(&fp, &u3).unwrap().len(), 6);
        let u1 = FpElement::single(0, FactorElement::Table(1));
        assert_eq!(augment(&fp, &u1), Err(RelativeError::SyllableLengthTooSmall(1)));
    }

    #[test]
    fn free_reduction_and_equality() {
        let g = z4();
        let xs = xy();
        let p = |s: &str| parse_relative(&g, &xs, s).unwrap();
        assert!(rel_equal(&g, &p("{a} x x^-1 {a}"), &p("{a2}")));
        assert!(!rel_equal(&g, &p("x {a}"), &p("{a} x")));
    }
}
