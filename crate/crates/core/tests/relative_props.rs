use proptest::prelude::*;

use picture_calculus::freeprod::{FactorElement, FactorGroup, FiniteGroup, FpElement, FreeProduct, Syllable};
use picture_calculus::relative::{
    augment, check_orientable, is_rel_cyclically_reduced, rel_cyclic_reduce, rel_inverse, star_x, RelSyllable, RelativeWord,
};

fn h() -> FiniteGroup {
    FiniteGroup::cyclic(3, "t")
}

/// `H * F(x1, x2)` as a free product, so relative words become ordinary
/// free-product elements.
fn ambient() -> FreeProduct {
    FreeProduct::new(vec![
        FactorGroup::Finite(h()),
        FactorGroup::InfiniteCyclic { name: "x1".into() },
        FactorGroup::InfiniteCyclic { name: "x2".into() },
    ])
}

fn flatten(w: &RelativeWord<usize>) -> FpElement {
    let fp = ambient();
    let mut s = vec![Syllable { factor: 0, elem: FactorElement::Table(w.head) }];
    for x in &w.syllables {
        s.push(Syllable { factor: 1 + x.x, elem: FactorElement::Power(i64::from(x.sign)) });
        s.push(Syllable { factor: 0, elem: FactorElement::Table(x.h) });
    }
    fp.normal_form(&FpElement::new(s)).unwrap()
}

/// Number of X-letters left after cyclic reduction in the free product.
fn x_length(e: &FpElement) -> u64 {
    let (core, _) = ambient().cyclic_reduce(e).unwrap();
    core.syllables
        .iter()
        .map(|s| match s.elem {
            FactorElement::Power(k) => k.unsigned_abs(),
            FactorElement::Table(_) => 0,
        })
        .sum()
}

fn rel_word() -> impl Strategy<Value = RelativeWord<usize>> {
    // h = 0 is the identity of the cyclic table; make it common.
    let h = prop_oneof![2 => Just(0usize), 1 => 1usize..3];
    (0usize..3, prop::collection::vec((0usize..2, any::<bool>(), h), 0..8)).prop_map(|(head, v)| {
        RelativeWord::new(head, v.into_iter().map(|(x, pos, h)| RelSyllable { x, sign: if pos { 1 } else { -1 }, h }).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn cyclic_reduction(w in rel_word()) {
        let g = h();
        let r = rel_cyclic_reduce(&g, &w);
        prop_assert_eq!(rel_cyclic_reduce(&g, &r), r.clone());
        prop_assert!(is_rel_cyclically_reduced(&g, &r));
        // No x^e 1 x^-e anywhere, indices read cyclically.
        let n = r.syllables.len();
        if n >= 2 {
            for i in 0..n {
                let (a, b) = (&r.syllables[i], &r.syllables[(i + 1) % n]);
                prop_assert!(!(a.h == 0 && a.x == b.x && a.sign == -b.sign), "{:?} at {}", r, i);
            }
        }
        if !r.syllables.is_empty() {
            prop_assert_eq!(r.head, 0);
        }
        let (before, after) = (flatten(&w), flatten(&r));
        prop_assert!(ambient().conjugate(&before, &after).unwrap().is_some());
        prop_assert_eq!(n as u64, x_length(&before));
    }

    #[test]
    fn star_x_closure(ws in prop::collection::vec(rel_word(), 1..4)) {
        let g = h();
        let ws: Vec<_> = ws.iter().map(|w| rel_cyclic_reduce(&g, w)).filter(|w| !w.syllables.is_empty()).collect();
        let star = star_x(&g, &ws);
        let bound: usize = ws.iter().map(|w| 2 * w.syllables.len()).sum();
        prop_assert!(star.len() <= bound);
        for s in &star {
            prop_assert!(!s.syllables.is_empty());
            prop_assert_eq!(s.head, 0);
            let e = flatten(s);
            let fp = ambient();
            let related = ws.iter().any(|w| {
                let f = flatten(w);
                fp.conjugate(&f, &e).unwrap().is_some() || fp.conjugate(&fp.inverse(&f).unwrap(), &e).unwrap().is_some()
            });
            prop_assert!(related, "{:?}", s);
        }
        for w in &ws {
            prop_assert!(star.contains(w));
            prop_assert!(star.contains(&rel_inverse(&g, w)));
        }
    }
}

/// Every normal form of syllable length at most `n`.
fn normal_forms(fp: &FreeProduct, n: usize) -> Vec<FpElement> {
    let mut out = Vec::new();
    let mut layer = vec![FpElement::identity()];
    for _ in 0..n {
        let mut next = Vec::new();
        for e in &layer {
            for (i, f) in fp.factors().iter().enumerate() {
                let FactorGroup::Finite(g) = f else { unreachable!() };
                if e.syllables.last().is_some_and(|s| s.factor == i) {
                    continue;
                }
                for x in 1..g.order() {
                    let mut s = e.syllables.clone();
                    s.push(Syllable { factor: i, elem: FactorElement::Table(x) });
                    next.push(FpElement::new(s));
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[test]
fn augmentations() {
    let fp = FreeProduct::new(vec![
        FactorGroup::Finite(FiniteGroup::cyclic(2, "a")),
        FactorGroup::Finite(FiniteGroup::cyclic(3, "c")),
    ]);
    let mut checked = 0;
    for u in normal_forms(&fp, 4) {
        if u.len() < 2 {
            assert!(augment(&fp, &u).is_err());
            continue;
        }
        let aug = augment(&fp, &u).unwrap();
        assert_eq!(aug.len(), 2 * u.len());
        let cyclic = u.syllables[0].factor != u.syllables[u.len() - 1].factor;
        assert_eq!(is_rel_cyclically_reduced(&fp, &aug), cyclic, "{}", fp.format(&u));
        if cyclic {
            let inv = fp.inverse(&u).unwrap();
            let self_inverse = (0..u.len()).any(|k| {
                let mut s = u.syllables.clone();
                s.rotate_left(k);
                s == inv.syllables
            });
            assert_eq!(check_orientable(&fp, std::slice::from_ref(&aug)).orientable, !self_inverse, "{}", fp.format(&u));
            for k in 0..aug.len() {
                assert!(star_x(&fp, std::slice::from_ref(&aug)).contains(&aug.rotate(k)));
            }
        }
        checked += 1;
    }
    assert!(checked > 0);
}
