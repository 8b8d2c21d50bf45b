#![allow(dead_code)]

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use picture_calculus::builder::{glue, picture_from_certificate, ConjugateProduct, Factor};
use picture_calculus::moves::{apply, candidate_moves, Move, XSet};
use picture_calculus::picture::Picture;
use picture_calculus::presentation::{check_rc, Presentation};
use picture_calculus::words::{Alphabet, Letter, Word};

pub fn ab() -> Alphabet {
    Alphabet::new(&["a", "b"]).unwrap()
}

pub fn random_reduced<R: Rng>(rng: &mut R, rank: usize, len: usize) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(len);
    while out.len() < len {
        let l = Letter::with_sign(rng.gen_range(0..rank), if rng.gen() { 1 } else { -1 });
        if out.last().is_some_and(|&p| p == l.inv()) {
            continue;
        }
        out.push(l);
    }
    Word::from_letters(out)
}

pub fn random_cyclically_reduced<R: Rng>(rng: &mut R, rank: usize, len: usize) -> Word {
    loop {
        let w = random_reduced(rng, rank, len);
        let ls = w.letters();
        if ls.len() < 2 || ls[0] != ls[ls.len() - 1].inv() {
            return w;
        }
    }
}

/// RC presentation on `a, b` with one to three relators of length at
/// most `max_len`; a third of the relators are proper powers.
pub fn random_rc_presentation<R: Rng>(rng: &mut R, max_len: usize) -> Presentation {
    loop {
        let k = rng.gen_range(1..=3);
        let rels: Vec<Word> = (0..k)
            .map(|_| {
                if rng.gen_range(0..3) == 0 {
                    let root_len = rng.gen_range(1..=(max_len / 2).max(1));
                    let period = rng.gen_range(2..=(max_len / root_len).max(2));
                    random_cyclically_reduced(rng, 2, root_len).pow(period as i64)
                } else {
                    let len = rng.gen_range(1..=max_len);
                    random_cyclically_reduced(rng, 2, len)
                }
            })
            .collect();
        if rels.iter().any(|r| r.len() > max_len) {
            continue;
        }
        let p = Presentation::new(ab(), rels);
        if check_rc(&p).holds {
            return p;
        }
    }
}

pub fn random_certificate<R: Rng>(rng: &mut R, pres: &Presentation, max_factors: usize, max_conj: usize) -> ConjugateProduct {
    let k = rng.gen_range(0..=max_factors);
    ConjugateProduct::new(
        (0..k)
            .map(|_| {
                let len = rng.gen_range(0..=max_conj);
                Factor {
                    conjugator: random_reduced(rng, pres.alphabet().len(), len),
                    relator: rng.gen_range(0..pres.relators().len()),
                    sign: *[1i8, -1].choose(rng).unwrap(),
                }
            })
            .collect(),
    )
}

/// Free reduction by repeated deletion of the leftmost cancelling pair.
pub fn naive_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut w = letters.to_vec();
    'outer: loop {
        for i in 0..w.len().saturating_sub(1) {
            if w[i] == w[i + 1].inv() {
                w.drain(i..i + 2);
                continue 'outer;
            }
        }
        return w;
    }
}

/// Value of a certificate spelled letter by letter.
pub fn naive_value(cp: &ConjugateProduct, pres: &Presentation) -> Vec<Letter> {
    let mut out = Vec::new();
    for f in &cp.factors {
        let u = f.conjugator.letters();
        out.extend_from_slice(u);
        let r = pres.relator(f.relator).letters();
        if f.sign > 0 {
            out.extend_from_slice(r);
        } else {
            out.extend(r.iter().rev().map(|l| l.inv()));
        }
        out.extend(u.iter().rev().map(|l| l.inv()));
    }
    naive_reduce(&out)
}

/// Smallest `d` with `r` equal to its rotation by `d`, turned into `|r| / d`.
pub fn naive_period(r: &[Letter]) -> usize {
    let n = r.len();
    (1..=n).find(|&d| (0..n).all(|i| r[i] == r[(i + d) % n])).map_or(0, |d| n / d)
}

/// A disk from a certificate, its double, or the empty picture.
pub fn random_start(rng: &mut ChaCha8Rng, p: &Presentation) -> Picture {
    let w = picture_from_certificate(&random_certificate(rng, p, 3, 2), p).unwrap();
    match rng.gen_range(0..4) {
        0 => Picture::empty(),
        1 => glue(&w, p, &w, p).unwrap().0,
        _ => w,
    }
}

/// A random legal move: a random kind among those with candidates, then
/// the first candidate of that kind in random order that applies.
pub fn random_legal_move(rng: &mut ChaCha8Rng, pic: &Picture, p: &Presentation, x: &XSet) -> Option<(Move, Picture)> {
    let mut by_kind: HashMap<&str, Vec<Move>> = HashMap::new();
    for m in candidate_moves(pic, p, x).unwrap() {
        by_kind.entry(move_kind(&m)).or_default().push(m);
    }
    let mut kinds: Vec<_> = by_kind.into_iter().collect();
    kinds.sort_by_key(|(k, _)| *k);
    kinds.shuffle(rng);
    kinds.into_iter().find_map(|(_, mut ms)| {
        ms.shuffle(rng);
        ms.into_iter().find_map(|m| apply(pic, &m, p, x).ok().map(|out| (m, out)))
    })
}

pub fn move_kind(m: &Move) -> &'static str {
    match m {
        Move::Bridge { .. } => "bridge",
        Move::Float { .. } => "float",
        Move::FloatInv { .. } => "float_inv",
        Move::Fold { .. } => "fold",
        Move::FoldInv { .. } => "fold_inv",
        Move::DeleteX { .. } => "delete_x",
        Move::InsertX { .. } => "insert_x",
    }
}

/// A certificate picture followed by up to `steps` random legal moves.
pub fn random_picture(rng: &mut ChaCha8Rng, p: &Presentation, x: &XSet, steps: usize) -> Picture {
    let mut pic = random_start(rng, p);
    for _ in 0..rng.gen_range(0..=steps) {
        match random_legal_move(rng, &pic, p, x) {
            Some((_, next)) => pic = next,
            None => break,
        }
    }
    pic
}

/// True when `b` is a cyclic rotation of `a`.
pub fn is_rotation(a: &[Letter], b: &[Letter]) -> bool {
    a.len() == b.len() && (a.is_empty() || (0..a.len()).any(|k| a[k..].iter().chain(&a[..k]).eq(b.iter())))
}
