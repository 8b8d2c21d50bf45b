//! Free products of finite (multiplication-table) groups and infinite cyclic
//! groups: normal forms, conjugacy, and the torsion theorem.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeProductError {
    #[error("factor index {0} out of range")]
    BadFactorIndex(usize),
    #[error("element {elem} is not in factor {factor}")]
    BadElement { factor: usize, elem: String },
    #[error("not a group table: {0}")]
    NonGroupTable(String),
    #[error("element is not in normal form")]
    NotNormalForm,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A group given by its full multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses.
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, FreeProductError> {
        let n = names.len();
        if n == 0 {
            return Err(FreeProductError::NonGroupTable("no elements".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(FreeProductError::NonGroupTable("table is not square over the element set".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| FreeProductError::NonGroupTable("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for x in 0..n {
            inverse[x] = (0..n)
                .find(|&y| table[x][y] == identity && table[y][x] == identity)
                .ok_or_else(|| FreeProductError::NonGroupTable(format!("`{}` has no inverse", names[x])))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(FreeProductError::NonGroupTable(format!(
                            "not associative at ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup { names, table, inverse, identity })
    }

    /// Cyclic group of order `n` with elements `1, g, g2, ...`.
    pub fn cyclic(n: usize, gen: &str) -> Self {
        assert!(n >= 1);
        let names = (0..n)
            .map(|k| match k {
                0 => "1".to_string(),
                1 => gen.to_string(),
                _ => format!("{gen}{k}"),
            })
            .collect();
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        FiniteGroup::new(names, table).expect("cyclic tables are groups")
    }

    /// Element names on the first line, then one row of product names per line.
    pub fn parse(text: &str) -> Result<Self, FreeProductError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or(FreeProductError::Parse { line: 1, msg: "empty table".into() })?;
        let names: Vec<String> = header.split_whitespace().map(str::to_string).collect();
        let mut table = Vec::new();
        for (ln, l) in lines {
            let row = l
                .split_whitespace()
                .map(|t| {
                    names.iter().position(|n| n == t).ok_or_else(|| FreeProductError::Parse {
                        line: ln,
                        msg: format!("unknown element `{t}`"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != names.len() {
                return Err(FreeProductError::Parse { line: ln, msg: format!("expected {} entries", names.len()) });
            }
            table.push(row);
        }
        FiniteGroup::new(names, table)
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorGroup {
    Finite(FiniteGroup),
    InfiniteCyclic { name: String },
}

/// An element of one factor: a table index or a power of the cyclic generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorElement {
    Table(usize),
    Power(i64),
}

impl FactorGroup {
    pub fn identity(&self) -> FactorElement {
        match self {
            FactorGroup::Finite(g) => FactorElement::Table(g.identity),
            FactorGroup::InfiniteCyclic { .. } => FactorElement::Power(0),
        }
    }

    pub fn contains(&self, x: FactorElement) -> bool {
        match (self, x) {
            (FactorGroup::Finite(g), FactorElement::Table(i)) => i < g.order(),
            (FactorGroup::InfiniteCyclic { .. }, FactorElement::Power(_)) => true,
            _ => false,
        }
    }

    pub fn is_identity(&self, x: FactorElement) -> bool {
        x == self.identity()
    }

    pub fn mul(&self, a: FactorElement, b: FactorElement) -> FactorElement {
        match (self, a, b) {
            (FactorGroup::Finite(g), FactorElement::Table(x), FactorElement::Table(y)) => FactorElement::Table(g.mul(x, y)),
            (FactorGroup::InfiniteCyclic { .. }, FactorElement::Power(x), FactorElement::Power(y)) => FactorElement::Power(x + y),
            _ => panic!("element kind does not match its factor"),
        }
    }

    pub fn inv(&self, a: FactorElement) -> FactorElement {
        match (self, a) {
            (FactorGroup::Finite(g), FactorElement::Table(x)) => FactorElement::Table(g.inv(x)),
            (FactorGroup::InfiniteCyclic { .. }, FactorElement::Power(x)) => FactorElement::Power(-x),
            _ => panic!("element kind does not match its factor"),
        }
    }

    /// Order of an element inside the factor; `None` for infinite order.
    pub fn element_order(&self, a: FactorElement) -> Option<u64> {
        match (self, a) {
            (FactorGroup::Finite(g), FactorElement::Table(x)) => Some(g.element_order(x)),
            (FactorGroup::InfiniteCyclic { .. }, FactorElement::Power(0)) => Some(1),
            (FactorGroup::InfiniteCyclic { .. }, FactorElement::Power(_)) => None,
            _ => panic!("element kind does not match its factor"),
        }
    }

    /// Some `h` with `h a h⁻¹ = b` inside the factor.
    pub fn conjugator(&self, a: FactorElement, b: FactorElement) -> Option<FactorElement> {
        match (self, a, b) {
            (FactorGroup::Finite(g), FactorElement::Table(x), FactorElement::Table(y)) => {
                (0..g.order()).find(|&h| g.mul(g.mul(h, x), g.inv(h)) == y).map(FactorElement::Table)
            }
            (FactorGroup::InfiniteCyclic { .. }, FactorElement::Power(x), FactorElement::Power(y)) => {
                (x == y).then_some(FactorElement::Power(0))
            }
            _ => None,
        }
    }

    pub fn format(&self, a: FactorElement) -> String {
        match (self, a) {
            (FactorGroup::Finite(g), FactorElement::Table(x)) => g.names[x].clone(),
            (FactorGroup::InfiniteCyclic { name }, FactorElement::Power(k)) => {
                if k == 1 {
                    name.clone()
                } else {
                    format!("{name}^{k}")
                }
            }
            _ => "?".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: usize,
    pub elem: FactorElement,
}

/// Element of a free product as a sequence of syllables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FpElement {
    pub syllables: Vec<Syllable>,
}

impl FpElement {
    pub fn identity() -> Self {
        FpElement { syllables: Vec::new() }
    }

    pub fn new(syllables: Vec<Syllable>) -> Self {
        FpElement { syllables }
    }

    pub fn single(factor: usize, elem: FactorElement) -> Self {
        FpElement { syllables: vec![Syllable { factor, elem }] }
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }
}

/// Result of the torsion analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Torsion {
    Infinite,
    /// `e = conjugator · element · conjugator⁻¹` with `element` in one factor.
    FiniteOrder { order: u64, conjugator: FpElement, element: FpElement },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeProduct {
    factors: Vec<FactorGroup>,
}

impl FreeProduct {
    pub fn new(factors: Vec<FactorGroup>) -> Self {
        FreeProduct { factors }
    }

    pub fn factors(&self) -> &[FactorGroup] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> Result<&FactorGroup, FreeProductError> {
        self.factors.get(i).ok_or(FreeProductError::BadFactorIndex(i))
    }

    fn check_syllable(&self, s: &Syllable) -> Result<(), FreeProductError> {
        let f = self.factor(s.factor)?;
        if !f.contains(s.elem) {
            return Err(FreeProductError::BadElement { factor: s.factor, elem: format!("{:?}", s.elem) });
        }
        Ok(())
    }

    pub fn normal_form(&self, e: &FpElement) -> Result<FpElement, FreeProductError> {
        let mut out: Vec<Syllable> = Vec::with_capacity(e.len());
        for s in &e.syllables {
            self.check_syllable(s)?;
            let f = &self.factors[s.factor];
            if f.is_identity(s.elem) {
                continue;
            }
            match out.last_mut() {
                Some(top) if top.factor == s.factor => {
                    let m = f.mul(top.elem, s.elem);
                    if f.is_identity(m) {
                        out.pop();
                    } else {
                        top.elem = m;
                    }
                }
                _ => out.push(*s),
            }
        }
        Ok(FpElement { syllables: out })
    }

    pub fn is_normal_form(&self, e: &FpElement) -> bool {
        e.syllables.iter().all(|s| {
            self.check_syllable(s).is_ok() && !self.factors[s.factor].is_identity(s.elem)
        }) && e.syllables.windows(2).all(|w| w[0].factor != w[1].factor)
    }

    fn require_normal(&self, e: &FpElement) -> Result<(), FreeProductError> {
        if self.is_normal_form(e) {
            Ok(())
        } else {
            Err(FreeProductError::NotNormalForm)
        }
    }

    pub fn mul(&self, a: &FpElement, b: &FpElement) -> Result<FpElement, FreeProductError> {
        let mut s = a.syllables.clone();
        s.extend_from_slice(&b.syllables);
        self.normal_form(&FpElement { syllables: s })
    }

    pub fn inverse(&self, a: &FpElement) -> Result<FpElement, FreeProductError> {
        let mut s = Vec::with_capacity(a.len());
        for x in a.syllables.iter().rev() {
            self.check_syllable(x)?;
            s.push(Syllable { factor: x.factor, elem: self.factors[x.factor].inv(x.elem) });
        }
        self.normal_form(&FpElement { syllables: s })
    }

    pub fn pow(&self, a: &FpElement, k: i64) -> Result<FpElement, FreeProductError> {
        let base = if k < 0 { self.inverse(a)? } else { self.normal_form(a)? };
        let mut acc = FpElement::identity();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base)?;
        }
        Ok(acc)
    }

    pub fn conjugate_by(&self, e: &FpElement, g: &FpElement) -> Result<FpElement, FreeProductError> {
        let t = self.mul(g, e)?;
        self.mul(&t, &self.inverse(g)?)
    }

    /// Cyclic reduction by syllable conjugation: returns `(core, g)` with
    /// `g e g⁻¹ = core` and the first and last syllables of `core` in
    /// different factors (or `core` of length ≤ 1).
    pub fn cyclic_reduce(&self, e: &FpElement) -> Result<(FpElement, FpElement), FreeProductError> {
        self.require_normal(e)?;
        let mut core = e.syllables.clone();
        let mut g = FpElement::identity();
        while core.len() >= 2 && core[0].factor == core[core.len() - 1].factor {
            let s = core.remove(0);
            let f = &self.factors[s.factor];
            let last = core.len() - 1;
            let m = f.mul(core[last].elem, s.elem);
            if f.is_identity(m) {
                core.pop();
            } else {
                core[last].elem = m;
            }
            let sinv = FpElement::single(s.factor, f.inv(s.elem));
            g = self.mul(&sinv, &g)?;
        }
        Ok((FpElement { syllables: core }, g))
    }

    /// Decides conjugacy of two normal forms; the witness `g` satisfies
    /// `g e1 g⁻¹ = e2`.
    pub fn conjugate(&self, e1: &FpElement, e2: &FpElement) -> Result<Option<FpElement>, FreeProductError> {
        let (c1, g1) = self.cyclic_reduce(e1)?;
        let (c2, g2) = self.cyclic_reduce(e2)?;
        if c1.len() != c2.len() {
            return Ok(None);
        }
        let h = match c1.len() {
            0 => FpElement::identity(),
            1 => {
                let (a, b) = (c1.syllables[0], c2.syllables[0]);
                if a.factor != b.factor {
                    return Ok(None);
                }
                match self.factors[a.factor].conjugator(a.elem, b.elem) {
                    Some(h) => self.normal_form(&FpElement::single(a.factor, h))?,
                    None => return Ok(None),
                }
            }
            n => {
                let Some(k) = (0..n).find(|&k| (0..n).all(|t| c1.syllables[(k + t) % n] == c2.syllables[t])) else {
                    return Ok(None);
                };
                self.inverse(&FpElement { syllables: c1.syllables[..k].to_vec() })?
            }
        };
        let w = self.mul(&self.inverse(&g2)?, &h)?;
        Ok(Some(self.mul(&w, &g1)?))
    }

    /// Torsion theorem: an element has finite order only when it is
    /// conjugate into a factor.
    pub fn torsion_witness(&self, e: &FpElement) -> Result<Torsion, FreeProductError> {
        let (core, g) = self.cyclic_reduce(e)?;
        let conjugator = self.inverse(&g)?;
        match core.len() {
            0 => Ok(Torsion::FiniteOrder { order: 1, conjugator, element: core }),
            1 => {
                let s = core.syllables[0];
                match self.factors[s.factor].element_order(s.elem) {
                    Some(order) => Ok(Torsion::FiniteOrder { order, conjugator, element: core }),
                    None => Ok(Torsion::Infinite),
                }
            }
            _ => Ok(Torsion::Infinite),
        }
    }

    /// Parses whitespace-separated tokens `name` or `name^k`, resolving
    /// names against finite element names and cyclic generator names.
    pub fn parse_element(&self, text: &str) -> Result<FpElement, FreeProductError> {
        let mut syllables = Vec::new();
        for tok in text.split_whitespace() {
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>().map_err(|_| FreeProductError::Parse { line: 1, msg: format!("bad exponent in `{tok}`") })?,
                ),
                None => (tok, 1),
            };
            let mut hit = None;
            for (fi, f) in self.factors.iter().enumerate() {
                match f {
                    FactorGroup::Finite(g) => {
                        if let Some(x) = g.names.iter().position(|n| n == name) {
                            let base = FpElement::single(fi, FactorElement::Table(x));
                            hit = Some(self.pow(&base, exp)?);
                        }
                    }
                    FactorGroup::InfiniteCyclic { name: n } if n == name => {
                        hit = Some(FpElement::single(fi, FactorElement::Power(exp)));
                    }
                    _ => {}
                }
                if hit.is_some() {
                    break;
                }
            }
            let part = hit.ok_or_else(|| FreeProductError::Parse { line: 1, msg: format!("unknown element `{name}`") })?;
            syllables.extend(part.syllables);
        }
        Ok(FpElement { syllables })
    }

    pub fn format(&self, e: &FpElement) -> String {
        if e.is_empty() {
            return "1".into();
        }
        e.syllables
            .iter()
            .map(|s| self.factors.get(s.factor).map_or("?".into(), |f| f.format(s.elem)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Torsion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Torsion::Infinite => write!(f, "infinite order"),
            Torsion::FiniteOrder { order, .. } => write!(f, "finite order {order}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Z2 * Z with Z2 = {1, a} and Z generated by b.
    fn z2_z() -> FreeProduct {
        FreeProduct::new(vec![
            FactorGroup::Finite(FiniteGroup::cyclic(2, "a")),
            FactorGroup::InfiniteCyclic { name: "b".into() },
        ])
    }

    #[test]
    fn normal_form_examples() {
        let g = z2_z();
        let e = g.parse_element("a a").unwrap();
        assert!(g.normal_form(&e).unwrap().is_empty());
        let e = g.parse_element("a b b^-1 a").unwrap();
        assert!(g.normal_form(&e).unwrap().is_empty());
        let e = g.parse_element("b a b^2").unwrap();
        assert_eq!(g.normal_form(&e).unwrap(), e);
        let bad = FpElement::single(5, FactorElement::Power(1));
        assert_eq!(g.normal_form(&bad), Err(FreeProductError::BadFactorIndex(5)));
    }

    #[test]
    fn conjugacy_examples() {
        let g = z2_z();
        let p = |s: &str| g.parse_element(s).unwrap();
        let w = g.conjugate(&p("b a b^-1"), &p("a")).unwrap().unwrap();
        assert_eq!(w, p("b^-1"));
        assert_eq!(g.conjugate(&p("a"), &p("b")).unwrap(), None);
        let w = g.conjugate(&p("a b"), &p("b a")).unwrap().unwrap();
        assert_eq!(g.conjugate_by(&p("a b"), &w).unwrap(), p("b a"));
        assert_eq!(g.conjugate(&p("a a"), &p("a")), Err(FreeProductError::NotNormalForm));
    }

    #[test]
    fn torsion_examples() {
        let g = z2_z();
        let p = |s: &str| g.parse_element(s).unwrap();
        match g.torsion_witness(&p("b a b^-1")).unwrap() {
            Torsion::FiniteOrder { order, conjugator, element } => {
                assert_eq!(order, 2);
                assert_eq!(conjugator, p("b"));
                assert_eq!(element, p("a"));
            }
            t => panic!("unexpected {t:?}"),
        }
        assert_eq!(g.torsion_witness(&p("a b")).unwrap(), Torsion::Infinite);
        assert_eq!(
            g.torsion_witness(&FpElement::identity()).unwrap(),
            Torsion::FiniteOrder { order: 1, conjugator: FpElement::identity(), element: FpElement::identity() }
        );
        assert_eq!(g.torsion_witness(&p("b^3")).unwrap(), Torsion::Infinite);
    }

    #[test]
    fn table_validation() {
        let z3 = "1 r r2\n1 r r2\nr r2 1\nr2 1 r\n";
        let g = FiniteGroup::parse(z3).unwrap();
        assert_eq!(g.order(), 3);
        assert_eq!(g.element_order(1), 3);
        // Not associative: the "rock-paper-scissors" table has an identity but fails associativity.
        let bad = "e x y\ne x y\nx e e\ny e e\n";
        assert!(matches!(FiniteGroup::parse(bad), Err(FreeProductError::NonGroupTable(_))));
        assert!(FiniteGroup::parse("e x\ne x\n").is_err());
    }
}
