mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use picture_calculus::builder::{glue, picture_from_certificate};
use picture_calculus::moves::{apply, build_xset, inverse, legal_moves, reduce_spherical, replay, Move};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn inverse_moves_undo(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_rc_presentation(&mut rng, 4);
        let x = build_xset(&p).unwrap();
        let pic = random_picture(&mut rng, &p, &x, 4);
        let Some((m, after)) = random_legal_move(&mut rng, &pic, &p, &x) else { return Ok(()) };
        let inv = inverse(&pic, &m, &p, &x).unwrap();
        if matches!(m, Move::Bridge { .. }) {
            prop_assert!(inv.is_none());
            return Ok(());
        }
        let inv = inv.unwrap_or_else(|| panic!("no inverse for {m:?}"));
        let back = apply(&after, &inv, &p, &x).unwrap();
        prop_assert!(back.is_isomorphic(&pic).unwrap(), "{:?} then {:?}", m, inv);
    }

    #[test]
    fn moves_keep_labels_and_signed_counts(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_rc_presentation(&mut rng, 4);
        let x = build_xset(&p).unwrap();
        let mut pic = random_start(&mut rng, &p);
        let label = pic.boundary_label();
        let count = pic.signed_vertex_count(&p);
        for _ in 0..10 {
            let Some((m, next)) = random_legal_move(&mut rng, &pic, &p, &x) else { break };
            prop_assert!(next.validate(&p).is_valid(), "{:?}", m);
            prop_assert_eq!(next.boundary_label(), label.clone());
            prop_assert_eq!(next.signed_vertex_count(&p), count.clone());
            if matches!(m, Move::Bridge { .. } | Move::Float { .. } | Move::FloatInv { .. }) {
                prop_assert_eq!(next.vertices.len(), pic.vertices.len());
            }
            pic = next;
        }
    }

    #[test]
    fn reduction_traces_replay(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_rc_presentation(&mut rng, 4);
        let x = build_xset(&p).unwrap();
        let w = picture_from_certificate(&random_certificate(&mut rng, &p, 3, 2), &p).unwrap();
        let (g, gp) = glue(&w, &p, &w, &p).unwrap();
        let red = reduce_spherical(&g, &x, &gp, 10 * g.vertices.len().max(1)).unwrap();
        prop_assert!(red.emptied);
        prop_assert_eq!(replay(&g, &red.trace, &gp, &x).unwrap(), red.picture);
        prop_assert!(red.trace.iter().all(|m| !m.is_insertion()));
    }
}

#[test]
fn legal_moves_all_apply() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let p = random_rc_presentation(&mut rng, 4);
        let x = build_xset(&p).unwrap();
        let pic = random_picture(&mut rng, &p, &x, 3);
        for m in legal_moves(&pic, &p, &x).unwrap() {
            let out = apply(&pic, &m, &p, &x).unwrap_or_else(|e| panic!("{m:?}: {e}"));
            assert!(out.validate(&p).is_valid(), "{m:?}");
        }
    }
}
