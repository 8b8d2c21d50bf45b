//! Free-group words over a fixed alphabet.
//!
//! A [`Word`] is a literal sequence of signed generators. Parsing keeps the
//! letters exactly as written so that hygiene checks can report unreduced
//! input; every algebraic operation ([`Word::mul`], [`Word::inverse`],
//! [`Word::pow`], [`reduce`]) returns a freely reduced result.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("the word is empty")]
    EmptyWord,
    #[error("the word is not cyclically reduced")]
    NotCyclicallyReduced,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid generator name `{0}`")]
    InvalidName(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
}

/// Ordered set of generator names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    names: Vec<String>,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, WordError> {
        let mut out: Vec<String> = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            if !valid_name(n) {
                return Err(WordError::InvalidName(n.to_string()));
            }
            if out.iter().any(|m| m == n) {
                return Err(WordError::DuplicateGenerator(n.to_string()));
            }
            out.push(n.to_string());
        }
        Ok(Alphabet { names: out })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, gen: usize) -> &str {
        &self.names[gen]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// True when every generator is a single lowercase ASCII letter, which
    /// enables the `A` = `a^-1` shorthand and letter-by-letter parsing.
    pub fn single_lowercase(&self) -> bool {
        self.names
            .iter()
            .all(|n| n.len() == 1 && n.as_bytes()[0].is_ascii_lowercase())
    }

    /// Parses a word in the text grammar `token*`, `token := name ('^' int)?`.
    /// The letters are kept exactly as written.
    pub fn parse(&self, text: &str) -> Result<Word, WordError> {
        let short = self.single_lowercase();
        let bytes = text.as_bytes();
        let mut i = 0;
        let mut letters = Vec::new();
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if !c.is_ascii_alphabetic() {
                return Err(WordError::Parse {
                    col: i + 1,
                    msg: format!("unexpected character `{}`", c as char),
                });
            }
            let start = i;
            let (gen, mut inverse) = if short {
                i += 1;
                let lower = c.to_ascii_lowercase() as char;
                let gen = self
                    .index(&lower.to_string())
                    .ok_or_else(|| WordError::UnknownGenerator((c as char).to_string()))?;
                (gen, c.is_ascii_uppercase())
            } else {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let name = &text[start..i];
                let gen = self
                    .index(name)
                    .ok_or_else(|| WordError::UnknownGenerator(name.to_string()))?;
                (gen, false)
            };
            let mut exp: i64 = 1;
            let mut j = i;
            while j < bytes.len() && bytes[j] == b' ' {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'^' {
                j += 1;
                while j < bytes.len() && bytes[j] == b' ' {
                    j += 1;
                }
                let num_start = j;
                if j < bytes.len() && (bytes[j] == b'-' || bytes[j] == b'+') {
                    j += 1;
                }
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                exp = text[num_start..j].parse().map_err(|_| WordError::Parse {
                    col: num_start + 1,
                    msg: "expected an integer exponent".into(),
                })?;
                i = j;
            }
            if exp < 0 {
                inverse = !inverse;
                exp = -exp;
            }
            for _ in 0..exp {
                letters.push(Letter { gen, inverse });
            }
        }
        Ok(Word(letters))
    }

    /// Canonical text: runs of equal letters collapse to `x^k`, inverses
    /// print as `x^-1`. The identity prints as the empty string.
    pub fn format(&self, w: &Word) -> String {
        let mut parts = Vec::new();
        let ls = w.letters();
        let mut i = 0;
        while i < ls.len() {
            let mut j = i;
            while j < ls.len() && ls[j] == ls[i] {
                j += 1;
            }
            let run = (j - i) as i64;
            let exp = if ls[i].inverse { -run } else { run };
            let name = self.name(ls[i].gen);
            if exp == 1 {
                parts.push(name.to_string());
            } else {
                parts.push(format!("{name}^{exp}"));
            }
            i = j;
        }
        parts.join(" ")
    }

    /// All freely reduced words of length exactly `len`, in length-lex order.
    pub fn reduced_words(&self, len: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        for _ in 0..len {
            let mut next = Vec::new();
            for w in &out {
                for l in self.letters() {
                    if w.0.last().is_some_and(|&last| last == l.inv()) {
                        continue;
                    }
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(Word(v));
                }
            }
            out = next;
        }
        out
    }

    /// The letters `a, a^-1, b, b^-1, ...` in the fixed letter order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.len()).flat_map(|g| [Letter::pos(g), Letter::neg(g)])
    }
}

/// A generator or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn pos(gen: usize) -> Self {
        Letter { gen, inverse: false }
    }

    pub fn neg(gen: usize) -> Self {
        Letter { gen, inverse: true }
    }

    pub fn with_sign(gen: usize, sign: i8) -> Self {
        Letter { gen, inverse: sign < 0 }
    }

    pub fn inv(self) -> Self {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    pub fn sign(self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// A finite sequence of letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Keeps the letters as given.
    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    /// Freely reduces the letters on construction.
    pub fn reduced(letters: Vec<Letter>) -> Self {
        reduce(&Word(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != p[1].inv())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.0.first(), self.0.last()) {
                (Some(&f), Some(&l)) => self.0.len() == 1 || f != l.inv(),
                _ => true,
            }
    }

    /// Formal inverse: reversed, each letter inverted. Not reduced.
    pub fn formal_inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn inverse(&self) -> Word {
        reduce(&self.formal_inverse())
    }

    /// Concatenation without cancellation.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Product in the free group.
    pub fn mul(&self, other: &Word) -> Word {
        reduce(&self.concat(other))
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { reduce(self) };
        let mut v = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            v.extend_from_slice(&base.0);
        }
        reduce(&Word(v))
    }

    /// Literal repetition.
    pub fn repeat(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }

    /// `g w g^-1`, reduced.
    pub fn conjugate_by(&self, g: &Word) -> Word {
        reduce(&g.concat(self).concat(&g.formal_inverse()))
    }

    /// The cyclic shift starting at position `k`.
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word(self.0[..k].to_vec())
    }

    pub fn is_cyclic_permutation_of(&self, other: &Word) -> bool {
        self.len() == other.len() && (0..self.len().max(1)).any(|k| &other.rotate(k) == self)
    }

    /// Exponent sum of every generator.
    pub fn exponent_sums(&self, rank: usize) -> Vec<i64> {
        let mut v = vec![0i64; rank];
        for l in &self.0 {
            v[l.gen] += l.sign() as i64;
        }
        v
    }

    /// Length-lex comparison key.
    pub fn shortlex_key(&self) -> (usize, &[Letter]) {
        (self.0.len(), &self.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| {
                if l.inverse {
                    format!("g{}^-1", l.gen)
                } else {
                    format!("g{}", l.gen)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Free reduction.
pub fn reduce(w: &Word) -> Word {
    let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in &w.0 {
        if stack.last().is_some_and(|&top| top == l.inv()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    Word(stack)
}

/// Returns `(core, conjugator)` with `conjugator · core · conjugator⁻¹ = w`
/// in the free group and `core` cyclically reduced.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let r = reduce(w);
    let ls = r.letters();
    let mut i = 0;
    let mut j = ls.len();
    while j > i + 1 && ls[i] == ls[j - 1].inv() {
        i += 1;
        j -= 1;
    }
    (Word(ls[i..j].to_vec()), Word(ls[..i].to_vec()))
}

/// Root and period of a cyclically reduced nonempty word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootPeriod {
    pub root: Word,
    pub period: usize,
}

pub fn root_and_period(w: &Word) -> Result<RootPeriod, WordError> {
    if w.is_empty() {
        return Err(WordError::EmptyWord);
    }
    if !w.is_cyclically_reduced() {
        return Err(WordError::NotCyclicallyReduced);
    }
    let n = w.len();
    // The smallest period of a word dividing its length gives the primitive root.
    for d in 1..=n {
        if n.is_multiple_of(d) && (d..n).all(|i| w.0[i] == w.0[i - d]) {
            return Ok(RootPeriod { root: w.prefix(d), period: n / d });
        }
    }
    unreachable!("d = n always qualifies")
}

/// Decides conjugacy in the free group. When conjugate, returns `g` with
/// `g u g⁻¹ = v`.
pub fn are_conjugate(u: &Word, v: &Word) -> Option<Word> {
    let (cu, gu) = cyclic_reduce(u);
    let (cv, gv) = cyclic_reduce(v);
    if cu.len() != cv.len() {
        return None;
    }
    let n = cu.len();
    // cu rotated by k equals cv: cv = p⁻¹ cu p with p = cu[..k].
    let k = if n == 0 {
        0
    } else {
        (0..n).find(|&k| cu.rotate(k) == cv)?
    };
    let p = cu.prefix(k);
    // u = gu cu gu⁻¹, v = gv cv gv⁻¹ = gv p⁻¹ cu p gv⁻¹
    // so g = gv p⁻¹ gu⁻¹.
    Some(reduce(&gv.concat(&p.formal_inverse()).concat(&gu.formal_inverse())))
}

/// `R*`: every cyclic permutation of every word of `R` and of its inverse.
pub fn star_closure(rels: &[Word]) -> Result<BTreeSet<Word>, WordError> {
    let mut out = BTreeSet::new();
    for r in rels {
        if r.is_empty() {
            return Err(WordError::EmptyWord);
        }
        if !r.is_cyclically_reduced() {
            return Err(WordError::NotCyclicallyReduced);
        }
        let inv = r.formal_inverse();
        for k in 0..r.len() {
            out.insert(r.rotate(k));
            out.insert(inv.rotate(k));
        }
    }
    Ok(out)
}
