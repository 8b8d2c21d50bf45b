//! Presentations `<A | R>` and their hygiene checks: condition RC, the
//! proper-power census, disjointness of symmetrized closures, pieces and the
//! small-cancellation condition C(p).
//!
//! Pieces follow the usual non-metric definition: a nonempty word that is a
//! common prefix of two distinct elements of the symmetrized closure `R*`.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::words::{cyclic_reduce, reduce, root_and_period, star_closure, Alphabet, Letter, RootPeriod, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresentationError {
    #[error("relator {0} is not cyclically reduced")]
    NotCyclicallyReduced(usize),
    #[error("relator {0} is empty")]
    EmptyRelator(usize),
    #[error("condition RC is violated: {0}")]
    RcViolated(RcReport),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    alphabet: Alphabet,
    relators: Vec<Word>,
    roots: Vec<Option<RootPeriod>>,
}

impl Presentation {
    /// Relators are kept as written; defects surface through [`check_rc`].
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Self {
        let roots = relators.iter().map(|r| root_and_period(r).ok()).collect();
        Presentation { alphabet, relators, roots }
    }

    /// Convenience constructor from generator names and relator texts.
    pub fn from_strs(gens: &[&str], rels: &[&str]) -> Result<Self, PresentationError> {
        let alphabet = Alphabet::new(gens)?;
        let relators = rels.iter().map(|r| alphabet.parse(r)).collect::<Result<Vec<_>, _>>()?;
        Ok(Presentation::new(alphabet, relators))
    }

    /// Parses the `[generators]` / `[relators]` text format.
    pub fn parse(text: &str) -> Result<Self, PresentationError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Gens,
            Rels,
        }
        let mut section = Section::None;
        let mut names: Vec<String> = Vec::new();
        let mut rel_lines: Vec<(usize, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let ln = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[generators]" => {
                    if section != Section::None {
                        return Err(PresentationError::Parse { line: ln, msg: "`[generators]` must come first".into() });
                    }
                    section = Section::Gens;
                }
                "[relators]" => {
                    if section != Section::Gens {
                        return Err(PresentationError::Parse { line: ln, msg: "`[relators]` must follow `[generators]`".into() });
                    }
                    section = Section::Rels;
                }
                _ => match section {
                    Section::None => {
                        return Err(PresentationError::Parse { line: ln, msg: "expected `[generators]`".into() })
                    }
                    Section::Gens => names.extend(line.split_whitespace().map(str::to_string)),
                    Section::Rels => rel_lines.push((ln, line.to_string())),
                },
            }
        }
        if section == Section::None {
            return Err(PresentationError::Parse { line: 1, msg: "missing `[generators]` section".into() });
        }
        let alphabet = Alphabet::new(&names).map_err(|e| PresentationError::Parse { line: 1, msg: e.to_string() })?;
        let mut relators = Vec::new();
        for (ln, l) in rel_lines {
            let w = alphabet.parse(&l).map_err(|e| PresentationError::Parse { line: ln, msg: e.to_string() })?;
            relators.push(w);
        }
        Ok(Presentation::new(alphabet, relators))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("[generators]\n");
        s.push_str(&self.alphabet.names().join(" "));
        s.push_str("\n[relators]\n");
        for r in &self.relators {
            s.push_str(&self.alphabet.format(r));
            s.push('\n');
        }
        s
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn relator(&self, i: usize) -> &Word {
        &self.relators[i]
    }

    /// Cached root and period; `None` for empty or non-cyclically-reduced relators.
    pub fn root_period(&self, i: usize) -> Option<&RootPeriod> {
        self.roots[i].as_ref()
    }

    pub fn period(&self, i: usize) -> usize {
        self.roots[i].as_ref().map_or(1, |rp| rp.period)
    }

    pub fn format(&self, w: &Word) -> String {
        self.alphabet.format(w)
    }

    /// Presentation over the same alphabet with both relator lists.
    pub fn union(&self, other: &Presentation) -> Option<Presentation> {
        if self.alphabet != other.alphabet {
            return None;
        }
        let mut rels = self.relators.clone();
        for r in &other.relators {
            if !rels.contains(r) {
                rels.push(r.clone());
            }
        }
        Some(Presentation::new(self.alphabet.clone(), rels))
    }

    pub fn require_rc(&self) -> Result<(), PresentationError> {
        let rep = check_rc(self);
        if rep.holds {
            Ok(())
        } else {
            Err(PresentationError::RcViolated(rep))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", content = "relators")]
pub enum RcViolation {
    NotCyclicallyReduced(usize),
    EmptyRelator(usize),
    ConjugatePair(usize, usize),
    ConjugateToInverse(usize),
}

impl fmt::Display for RcViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RcViolation::NotCyclicallyReduced(i) => write!(f, "relator {i} is not cyclically reduced"),
            RcViolation::EmptyRelator(i) => write!(f, "relator {i} is trivial in the free group"),
            RcViolation::ConjugatePair(i, j) => write!(f, "relators {i} and {j} are conjugate up to inversion"),
            RcViolation::ConjugateToInverse(i) => write!(f, "relator {i} is conjugate to its inverse"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RcReport {
    pub holds: bool,
    pub violations: Vec<RcViolation>,
}

impl fmt::Display for RcReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            return write!(f, "RC holds");
        }
        let v: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", v.join("; "))
    }
}

fn is_rotation(a: &[Letter], b: &[Letter]) -> bool {
    let n = a.len();
    if n != b.len() {
        return false;
    }
    if n == 0 {
        return true;
    }
    (0..n).any(|k| (0..n).all(|t| a[(k + t) % n] == b[t]))
}

/// Checks condition RC and lists every violation.
pub fn check_rc(p: &Presentation) -> RcReport {
    let mut violations = Vec::new();
    // Cyclically reduced cores of the free-group elements; conjugacy of
    // nontrivial elements is rotation-equality of cores.
    let mut cores: Vec<Option<(Word, Word)>> = Vec::with_capacity(p.relators.len());
    for (i, r) in p.relators.iter().enumerate() {
        if !r.is_empty() && !r.is_cyclically_reduced() {
            violations.push(RcViolation::NotCyclicallyReduced(i));
        }
        let (core, _) = cyclic_reduce(r);
        if core.is_empty() {
            violations.push(RcViolation::EmptyRelator(i));
            cores.push(None);
        } else {
            let inv = core.formal_inverse();
            cores.push(Some((core, inv)));
        }
    }
    for i in 0..cores.len() {
        let Some((ci, ii)) = &cores[i] else { continue };
        if is_rotation(ci.letters(), ii.letters()) {
            violations.push(RcViolation::ConjugateToInverse(i));
        }
        for j in i + 1..cores.len() {
            let Some((cj, _)) = &cores[j] else { continue };
            if is_rotation(ci.letters(), cj.letters()) || is_rotation(ii.letters(), cj.letters()) {
                violations.push(RcViolation::ConjugatePair(i, j));
            }
        }
    }
    RcReport { holds: violations.is_empty(), violations }
}

fn require_cyclically_reduced(rels: &[Word]) -> Result<(), PresentationError> {
    for (i, r) in rels.iter().enumerate() {
        if r.is_empty() {
            return Err(PresentationError::EmptyRelator(i));
        }
        if !r.is_cyclically_reduced() {
            return Err(PresentationError::NotCyclicallyReduced(i));
        }
    }
    Ok(())
}

/// Relators with period greater than one.
pub fn proper_power_census(p: &Presentation) -> Result<Vec<(usize, RootPeriod)>, PresentationError> {
    require_cyclically_reduced(&p.relators)?;
    Ok(p.roots
        .iter()
        .enumerate()
        .filter_map(|(i, rp)| rp.as_ref().filter(|rp| rp.period > 1).map(|rp| (i, rp.clone())))
        .collect())
}

/// `None` when `R1*` and `R2*` are disjoint, otherwise the least common element.
pub fn stars_disjoint(r1: &[Word], r2: &[Word]) -> Result<Option<Word>, PresentationError> {
    require_cyclically_reduced(r1)?;
    require_cyclically_reduced(r2)?;
    let s1 = star_closure(r1)?;
    let s2 = star_closure(r2)?;
    Ok(s1.intersection(&s2).next().cloned())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub word: Word,
    /// Elements of `R*` having the piece as a prefix (at least two).
    pub occurrences: Vec<(Word, usize)>,
}

fn common_prefix_len(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// All pieces of an RC presentation, keyed by word.
pub fn pieces(p: &Presentation) -> Result<Vec<Piece>, PresentationError> {
    p.require_rc()?;
    let star: Vec<Word> = star_closure(&p.relators)?.into_iter().collect();
    // In sorted order the longest common prefix of any pair is the minimum
    // over the adjacent pairs between them, so adjacent pairs suffice.
    let mut found: BTreeMap<Word, BTreeSet<Word>> = BTreeMap::new();
    for w in star.windows(2) {
        let l = common_prefix_len(w[0].letters(), w[1].letters());
        for k in 1..=l {
            let e = found.entry(w[0].prefix(k)).or_default();
            e.insert(w[0].clone());
            e.insert(w[1].clone());
        }
    }
    Ok(found
        .into_iter()
        .map(|(word, occ)| Piece { word, occurrences: occ.into_iter().map(|w| (w, 0)).collect() })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallCancellation {
    pub p: usize,
    pub holds: bool,
    /// Fewest pieces whose product is the relator read cyclically; `None`
    /// when no decomposition into pieces exists.
    pub min_pieces: Vec<Option<usize>>,
}

/// Minimal number of pieces spelling some rotation of `r`.
pub fn min_piece_decomposition(r: &Word, piece_set: &HashSet<Vec<Letter>>) -> Option<usize> {
    let n = r.len();
    let doubled: Vec<Letter> = r.letters().iter().chain(r.letters()).copied().collect();
    // reach[i]: longest piece starting at position i of the doubled word.
    // Prefixes of pieces are pieces, so every shorter one is a piece too.
    let reach: Vec<usize> = (0..2 * n)
        .map(|i| (1..=n.min(2 * n - i)).take_while(|&l| piece_set.contains(&doubled[i..i + l])).last().unwrap_or(0))
        .collect();
    let mut best: Option<usize> = None;
    let mut dp: Vec<Option<usize>> = vec![None; n + 1];
    for k in 0..n {
        dp.fill(None);
        dp[0] = Some(0);
        for i in 0..n {
            let Some(d) = dp[i] else { continue };
            for j in i + 1..=(i + reach[k + i]).min(n) {
                if dp[j].is_none_or(|e| d + 1 < e) {
                    dp[j] = Some(d + 1);
                }
            }
        }
        if let Some(d) = dp[n] {
            best = Some(best.map_or(d, |b: usize| b.min(d)));
        }
    }
    best
}

/// C(p): no relator is a product of fewer than `p` pieces.
pub fn check_small_cancellation(pres: &Presentation, p: usize) -> Result<SmallCancellation, PresentationError> {
    pres.require_rc()?;
    let mut star: Vec<Vec<Letter>> = Vec::new();
    for r in &pres.relators {
        for w in [r.letters().to_vec(), r.formal_inverse().into_letters()] {
            let n = w.len();
            star.extend((0..n).map(|k| w[k..].iter().chain(&w[..k]).copied().collect::<Vec<_>>()));
        }
    }
    star.sort_unstable();
    star.dedup();
    let mut set: HashSet<Vec<Letter>> = HashSet::new();
    for w in star.windows(2) {
        for k in 1..=common_prefix_len(&w[0], &w[1]) {
            set.insert(w[0][..k].to_vec());
        }
    }
    let min_pieces: Vec<Option<usize>> = pres.relators.iter().map(|r| min_piece_decomposition(r, &set)).collect();
    let holds = min_pieces.iter().all(|m| m.is_none_or(|m| m >= p));
    Ok(SmallCancellation { p, holds, min_pieces })
}

/// Exponent-sum vector of a word relative to a presentation's alphabet.
pub fn exponent_vector(p: &Presentation, w: &Word) -> Vec<i64> {
    reduce(w).exponent_sums(p.alphabet.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rc_examples() {
        let p = Presentation::from_strs(&["a", "b"], &["a a b", "b a a"]).unwrap();
        let r = check_rc(&p);
        assert!(!r.holds);
        assert_eq!(r.violations, vec![RcViolation::ConjugatePair(0, 1)]);

        let p = Presentation::from_strs(&["a"], &["a a"]).unwrap();
        assert!(check_rc(&p).holds);

        let p = Presentation::from_strs(&["a", "b"], &["a b a^-1"]).unwrap();
        assert_eq!(check_rc(&p).violations, vec![RcViolation::NotCyclicallyReduced(0)]);

        let p = Presentation::from_strs(&["a", "b"], &["", "a b", "b^-1 a^-1"]).unwrap();
        assert_eq!(
            check_rc(&p).violations,
            vec![RcViolation::EmptyRelator(0), RcViolation::ConjugatePair(1, 2)]
        );
    }

    #[test]
    fn census_examples() {
        let p = Presentation::from_strs(&["a"], &["a a"]).unwrap();
        let c = proper_power_census(&p).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].0, c[0].1.period), (0, 2));
        let p = Presentation::from_strs(&["a", "b"], &["a b"]).unwrap();
        assert!(proper_power_census(&p).unwrap().is_empty());
        let p = Presentation::from_strs(&["a", "b"], &["a b a b a b", "a b b"]).unwrap();
        let c = proper_power_census(&p).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].1.root, p.alphabet().parse("a b").unwrap());
        assert_eq!(c[0].1.period, 3);
        let p = Presentation::from_strs(&["a", "b"], &["a b a^-1"]).unwrap();
        assert_eq!(proper_power_census(&p), Err(PresentationError::NotCyclicallyReduced(0)));
    }

    #[test]
    fn stars_examples() {
        let al = Alphabet::new(&["a", "b"]).unwrap();
        let w = |s: &str| al.parse(s).unwrap();
        assert_eq!(stars_disjoint(&[w("a a")], &[w("b b")]).unwrap(), None);
        assert_eq!(stars_disjoint(&[w("a b")], &[w("b a")]).unwrap().map(|x| x.len()), Some(2));
        // a a b and its inverse b^-1 a^-1 a^-1 share every rotation.
        let common = stars_disjoint(&[w("a a b")], &[w("b^-1 a^-1 a^-1")]).unwrap().unwrap();
        let s1 = star_closure(&[w("a a b")]).unwrap();
        let s2 = star_closure(&[w("b^-1 a^-1 a^-1")]).unwrap();
        assert!(s1.contains(&common) && s2.contains(&common));
        assert!(s1.contains(&w("a^-1 a^-1 b^-1")) && s2.contains(&w("a^-1 a^-1 b^-1")));
    }

    #[test]
    fn pieces_examples() {
        let p = Presentation::from_strs(&["a"], &["a a"]).unwrap();
        assert!(pieces(&p).unwrap().is_empty());
        let p = Presentation::from_strs(&["a", "b"], &["a b a^-1 b^-1"]).unwrap();
        let words: BTreeSet<String> = pieces(&p).unwrap().iter().map(|pc| p.format(&pc.word)).collect();
        let expect: BTreeSet<String> = ["a", "b", "a^-1", "b^-1"].iter().map(|s| s.to_string()).collect();
        assert_eq!(words, expect);
        let p = Presentation::from_strs(&["a", "b"], &[]).unwrap();
        assert!(pieces(&p).unwrap().is_empty());
        let bad = Presentation::from_strs(&["a", "b"], &["a b", "b a"]).unwrap();
        assert!(matches!(pieces(&bad), Err(PresentationError::RcViolated(_))));
    }

    #[test]
    fn small_cancellation_examples() {
        let p = Presentation::from_strs(&["a", "b"], &["a b a^-1 b^-1"]).unwrap();
        let c = check_small_cancellation(&p, 6).unwrap();
        assert!(!c.holds);
        assert_eq!(c.min_pieces, vec![Some(4)]);
        let p = Presentation::from_strs(&["a"], &["a a"]).unwrap();
        let c = check_small_cancellation(&p, 6).unwrap();
        assert!(c.holds);
        assert_eq!(c.min_pieces, vec![None]);
        let p = Presentation::from_strs(&["a", "b"], &["a b a^-1 b^-1", "a a b"]).unwrap();
        assert!(check_small_cancellation(&p, 1).unwrap().holds);
    }

    #[test]
    fn file_format() {
        let text = "# demo\n[generators]\na b\n[relators]\na^2\n# c\nb a b^-1 a^-1\n";
        let p = Presentation::parse(text).unwrap();
        assert_eq!(p.relators().len(), 2);
        assert_eq!(Presentation::parse(&p.to_text()).unwrap(), p);
        let err = Presentation::parse("[generators]\na\n[relators]\na c\n").unwrap_err();
        assert!(matches!(err, PresentationError::Parse { line: 4, .. }));
        assert!(Presentation::parse("a b\n").is_err());
    }
}
