mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use picture_calculus::builder::{
    evaluate, glue, picture_from_certificate, witness_search, ConjugateProduct, MembershipVerdict,
};
use picture_calculus::moves::build_xset;
use picture_calculus::presentation::Presentation;
use picture_calculus::words::{reduce, Word};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn boundary_reduces_to_the_certificate_value(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_rc_presentation(&mut rng, 4);
        let cp = random_certificate(&mut rng, &p, 3, 2);
        let pic = picture_from_certificate(&cp, &p).unwrap();
        prop_assert!(pic.validate(&p).is_valid());
        prop_assert_eq!(pic.vertices.len(), cp.factors.len());
        let expected = naive_value(&cp, &p);
        prop_assert_eq!(reduce(&pic.boundary_label()).into_letters(), expected.clone());
        prop_assert_eq!(evaluate(&cp, &p).unwrap().into_letters(), expected);
        let back = ConjugateProduct::from_json(&cp.to_json(p.alphabet()).to_string(), p.alphabet()).unwrap();
        prop_assert_eq!(back, cp);
    }

    #[test]
    fn found_witnesses_verify(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_rc_presentation(&mut rng, 4);
        let w = if rng.gen() {
            Word::from_letters(naive_value(&random_certificate(&mut rng, &p, 2, 1), &p))
        } else {
            let len = rng.gen_range(0..=4);
            random_reduced(&mut rng, 2, len)
        };
        match witness_search(&w, &p, 2, 1, 1).unwrap() {
            MembershipVerdict::Found(cp) => {
                prop_assert!(cp.factors.len() <= 2);
                prop_assert!(cp.factors.iter().all(|f| f.conjugator.len() <= 1));
                prop_assert_eq!(naive_value(&cp, &p), reduce(&w).letters().to_vec());
            }
            MembershipVerdict::NotFoundWithin { .. } | MembershipVerdict::RefutedByAbelianization(_) => {}
        }
    }

    #[test]
    fn bounded_certificates_are_found(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_rc_presentation(&mut rng, 4);
        let cp = random_certificate(&mut rng, &p, 2, 1);
        let w = Word::from_letters(naive_value(&cp, &p));
        let verdict = witness_search(&w, &p, cp.factors.len(), 1, 1).unwrap();
        prop_assert!(matches!(verdict, MembershipVerdict::Found(_)), "{:?} for {:?}", verdict, cp);
    }

    #[test]
    fn glue_with_a_deformed_copy(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_rc_presentation(&mut rng, 4);
        let x = build_xset(&p).unwrap();
        let w = picture_from_certificate(&random_certificate(&mut rng, &p, 3, 2), &p).unwrap();
        let mut w2 = w.clone();
        for _ in 0..rng.gen_range(0..5) {
            match random_legal_move(&mut rng, &w2, &p, &x) {
                Some((_, next)) => w2 = next,
                None => break,
            }
        }
        let (g, gp) = glue(&w, &p, &w2, &p).unwrap();
        prop_assert!(g.is_spherical());
        prop_assert!(g.validate(&gp).is_valid());
        prop_assert_eq!(g.vertices.len(), w.vertices.len() + w2.vertices.len());
        let diff: Vec<i64> = w.signed_vertex_count(&p).iter().zip(w2.signed_vertex_count(&p)).map(|(a, b)| a - b).collect();
        prop_assert_eq!(g.signed_vertex_count(&gp), diff);
    }
}

#[test]
fn even_powers_in_z2() {
    let p = Presentation::from_strs(&["a"], &["a a"]).unwrap();
    for k in 1..=4 {
        let w = p.alphabet().parse(&format!("a^{}", 2 * k)).unwrap();
        match witness_search(&w, &p, k, 0, 1).unwrap() {
            MembershipVerdict::Found(cp) => assert_eq!(evaluate(&cp, &p).unwrap(), w),
            v => panic!("a^{}: {v:?}", 2 * k),
        }
        let odd = p.alphabet().parse(&format!("a^{}", 2 * k - 1)).unwrap();
        assert!(matches!(witness_search(&odd, &p, k, 0, 1).unwrap(), MembershipVerdict::RefutedByAbelianization(_)));
    }
}

#[test]
fn search_is_independent_of_jobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let p = random_rc_presentation(&mut rng, 3);
        let cp = random_certificate(&mut rng, &p, 2, 1);
        let w = Word::from_letters(naive_value(&cp, &p));
        let one = witness_search(&w, &p, 2, 1, 1).unwrap();
        for jobs in [2, 3] {
            assert_eq!(witness_search(&w, &p, 2, 1, jobs).unwrap(), one);
        }
    }
}

