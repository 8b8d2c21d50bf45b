//! Pictures from products of conjugates of relators, bounded search for
//! such products, and gluing two disk pictures into a spherical one.

use std::collections::{HashMap, HashSet};

use petgraph::unionfind::UnionFind;
use serde_json::{json, Value};
use thiserror::Error;

use crate::abelian::{exponent_matrix, lattice_membership};
use crate::picture::{landing, orientation_for, Analysis, Arc, ArcKind, Child, Corner, End, FaceRef, Nest, Node, Picture, PictureError};
use crate::presentation::{exponent_vector, Presentation, PresentationError};
use crate::words::{reduce, Alphabet, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuilderError {
    #[error("relator index {0} out of range")]
    BadRelatorIndex(usize),
    #[error("boundary labels differ")]
    BoundaryMismatch,
    #[error("presentations use different alphabets")]
    AlphabetMismatch,
    #[error("certificate: {0}")]
    Certificate(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Picture(#[from] PictureError),
}

/// One factor `u r^ε u⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    pub conjugator: Word,
    pub relator: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ConjugateProduct {
    pub factors: Vec<Factor>,
}

impl ConjugateProduct {
    pub fn new(factors: Vec<Factor>) -> Self {
        ConjugateProduct { factors }
    }

    /// `[[conjugator, relator, sign], ...]`
    pub fn to_json(&self, alphabet: &Alphabet) -> Value {
        Value::Array(
            self.factors
                .iter()
                .map(|f| json!([alphabet.format(&f.conjugator), f.relator, f.sign]))
                .collect(),
        )
    }

    pub fn from_json(text: &str, alphabet: &Alphabet) -> Result<Self, BuilderError> {
        let err = |m: String| BuilderError::Certificate(m);
        let rows: Vec<(String, usize, i8)> = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
        let mut factors = Vec::new();
        for (i, (u, relator, sign)) in rows.into_iter().enumerate() {
            if sign != 1 && sign != -1 {
                return Err(err(format!("factor {i}: sign must be 1 or -1")));
            }
            let conjugator = alphabet.parse(&u).map_err(|e| err(format!("factor {i}: {e}")))?;
            factors.push(Factor { conjugator, relator, sign });
        }
        Ok(ConjugateProduct { factors })
    }
}

fn factor_word(f: &Factor, pres: &Presentation) -> Result<Word, BuilderError> {
    let r = pres.relators().get(f.relator).ok_or(BuilderError::BadRelatorIndex(f.relator))?;
    let rr = if f.sign < 0 { r.formal_inverse() } else { r.clone() };
    Ok(f.conjugator.concat(&rr).concat(&f.conjugator.formal_inverse()))
}

/// Free reduction of `∏ uᵢ rᵢ^εᵢ uᵢ⁻¹`.
pub fn evaluate(cp: &ConjugateProduct, pres: &Presentation) -> Result<Word, BuilderError> {
    let mut acc = Word::identity();
    for f in &cp.factors {
        acc = acc.concat(&factor_word(f, pres)?);
    }
    Ok(reduce(&acc))
}

/// Lollipop layout: each factor owns a block of boundary slots holding
/// `u`, then `r^ε`, then `u⁻¹`; the vertex fans out to the middle part and
/// the conjugator letters pair up in nested boundary-to-boundary arcs.
pub fn picture_from_certificate(cp: &ConjugateProduct, pres: &Presentation) -> Result<Picture, BuilderError> {
    pres.require_rc()?;
    let mut total = 0;
    for f in &cp.factors {
        total += factor_word(f, pres)?.len();
    }
    let mut pic = Picture::empty();
    pic.boundary.rotation = vec![usize::MAX; total];
    let mut p = 0;
    for f in &cp.factors {
        let r = pres.relator(f.relator);
        let w = if f.sign < 0 { r.formal_inverse() } else { r.clone() };
        let u = f.conjugator.letters();
        let (k, n) = (u.len(), w.len());
        let v = pic.add_vertex(f.relator, f.sign, n, 0);
        for (m, l) in w.letters().iter().enumerate() {
            pic.add_arc_reading(l.gen, l.sign(), End { node: Node::Vertex(v), slot: m }, bslot(p + k + m));
        }
        for (j, l) in u.iter().enumerate() {
            pic.add_arc_reading(l.gen, l.sign(), bslot(p + j), bslot(p + 2 * k + n - 1 - j));
        }
        p += 2 * k + n;
    }
    Ok(pic)
}

fn bslot(slot: usize) -> End {
    End { node: Node::Boundary, slot }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipVerdict {
    Found(ConjugateProduct),
    NotFoundWithin { max_factors: usize, max_conjugator_len: usize },
    RefutedByAbelianization(String),
}

/// Exhaustive search in length-lex order: fewer factors first, then
/// lexicographic in the factor order (conjugator shortlex, relator index,
/// sign `+` before `-`). With `jobs > 1` the first factor is split across
/// threads and the globally least certificate is reported.
pub fn witness_search(
    w: &Word,
    pres: &Presentation,
    max_factors: usize,
    max_conjugator_len: usize,
    jobs: usize,
) -> Result<MembershipVerdict, BuilderError> {
    pres.require_rc()?;
    let target = reduce(w);
    let v = exponent_vector(pres, &target);
    let lattice = exponent_matrix(pres);
    if !lattice_membership(&v, &lattice).expect("exponent vectors have alphabet length") {
        return Ok(MembershipVerdict::RefutedByAbelianization(format!(
            "exponent sums {v:?} are not in the relator lattice"
        )));
    }
    let mut choices = Vec::new();
    for len in 0..=max_conjugator_len {
        for u in pres.alphabet().reduced_words(len) {
            for relator in 0..pres.relators().len() {
                for sign in [1, -1] {
                    let factor = Factor { conjugator: u.clone(), relator, sign };
                    let word = reduce(&factor_word(&factor, pres)?);
                    choices.push((factor, word));
                }
            }
        }
    }
    for k in 0..=max_factors {
        if k == 0 {
            if target.is_empty() {
                return Ok(MembershipVerdict::Found(ConjugateProduct::default()));
            }
            continue;
        }
        if let Some(seq) = search_level(&choices, &target, k, jobs.max(1)) {
            let factors = seq.into_iter().map(|i| choices[i].0.clone()).collect();
            return Ok(MembershipVerdict::Found(ConjugateProduct { factors }));
        }
    }
    Ok(MembershipVerdict::NotFoundWithin { max_factors, max_conjugator_len })
}

fn search_level(choices: &[(Factor, Word)], target: &Word, k: usize, jobs: usize) -> Option<Vec<usize>> {
    let run = |first: usize| -> Option<Vec<usize>> {
        let mut seq = vec![first];
        dfs(choices, target, k, &choices[first].1, &mut seq).then_some(seq)
    };
    if jobs == 1 {
        return (0..choices.len()).find_map(run);
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|t| {
                let run = &run;
                s.spawn(move || (t..choices.len()).step_by(jobs).find_map(run))
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().expect("search worker")).min()
    })
}

fn dfs(choices: &[(Factor, Word)], target: &Word, k: usize, acc: &Word, seq: &mut Vec<usize>) -> bool {
    if seq.len() == k {
        return acc == target;
    }
    for (i, (_, w)) in choices.iter().enumerate() {
        let next = acc.mul(w);
        seq.push(i);
        if dfs(choices, target, k, &next, seq) {
            return true;
        }
        seq.pop();
    }
    false
}

/// Glues `p1` to the mirror image of `p2` along their boundaries, giving a
/// spherical picture over the union of the presentations (the same
/// presentation when both agree).
pub fn glue(
    p1: &Picture,
    pres1: &Presentation,
    p2: &Picture,
    pres2: &Presentation,
) -> Result<(Picture, Presentation), BuilderError> {
    if pres1.alphabet() != pres2.alphabet() {
        return Err(BuilderError::AlphabetMismatch);
    }
    if p1.boundary_label() != p2.boundary_label() {
        return Err(BuilderError::BoundaryMismatch);
    }
    // Relators of pres2 already in pres1 keep pres1's index; the rest are appended.
    let mut rels = pres1.relators().to_vec();
    let rel_map: Vec<usize> = pres2
        .relators()
        .iter()
        .map(|r| {
            rels.iter().position(|s| s == r).unwrap_or_else(|| {
                rels.push(r.clone());
                rels.len() - 1
            })
        })
        .collect();
    let pres = if rels.len() == pres1.relators().len() {
        pres1.clone()
    } else {
        Presentation::new(pres1.alphabet().clone(), rels)
    };
    let mut m = p2.mirror();
    for v in m.vertices.values_mut() {
        v.relator = *rel_map.get(v.relator).ok_or(BuilderError::BadRelatorIndex(v.relator))?;
    }
    let sides = [p1, &m];
    let an = [p1.analyze()?, m.analyze()?];
    let n = p1.boundary.rotation.len();
    let (bp1, bp2) = (p1.boundary.basepoint as i64, m.boundary.basepoint as i64);
    let modn = |x: i64| x.rem_euclid(n.max(1) as i64) as usize;
    // Boundary slot `s` on one side meets slot `across(s)` on the other.
    let across = |s: usize| modn(bp1 + bp2 - 1 - s as i64);

    // Regions of both disks, merged across the equator.
    let rcount = |a: &Analysis| a.faces.len() + a.loop_parent.len();
    let off = rcount(&an[0]);
    let mut ruf = UnionFind::<usize>::new(off + rcount(&an[1]));
    let region = |side: usize, r: FaceRef| an[side].region(r).expect("valid reference") + if side == 1 { off } else { 0 };
    if n == 0 {
        ruf.union(region(0, bface(0)), region(1, bface(0)));
    } else {
        for g in 0..n {
            ruf.union(region(0, bface(g)), region(1, bface(modn(bp1 + bp2 - g as i64))));
        }
    }

    let voff = p1.next_vertex_id();
    let vmap = |side: usize, node: Node| match node {
        Node::Vertex(v) => Node::Vertex(if side == 1 { v + voff } else { v }),
        Node::Boundary => Node::Boundary,
    };
    let mut out = Picture { presentation_ref: p1.presentation_ref.clone(), ..Picture::default() };
    for (side, pic) in sides.iter().enumerate() {
        for (&id, v) in &pic.vertices {
            let mut v = v.clone();
            v.rotation.fill(usize::MAX);
            let Node::Vertex(nid) = vmap(side, Node::Vertex(id)) else { unreachable!() };
            out.vertices.insert(nid, v);
        }
    }

    // Separators of the glued sphere: loops between two regions (with the
    // sign read crossing from the first to the second) and components.
    let mut loop_seps: Vec<(usize, usize, usize, i8)> = Vec::new();
    let mut visited: HashSet<(usize, usize)> = HashSet::new();
    for (side, pic) in sides.iter().enumerate() {
        for (&id, a) in &pic.arcs {
            match a.ends() {
                None => {
                    let new = out.next_arc_id();
                    out.arcs.insert(new, *a);
                    let outside = region(side, an[side].loop_parent[&id]);
                    let inside = region(side, FaceRef::LoopInside(id));
                    loop_seps.push((new, outside, inside, a.orientation));
                }
                Some(e) if e.iter().all(|x| x.node != Node::Boundary) => {
                    let e = e.map(|x| End { node: vmap(side, x.node), slot: x.slot });
                    out.add_arc(a.label, a.orientation, e[0], e[1]);
                }
                Some(_) => {}
            }
        }
    }
    // Chains through the equator that start and end on vertices.
    for side in 0..2 {
        for (&id, a) in &sides[side].arcs {
            let Some(e) = a.ends() else { continue };
            let Some(start) = (0..2).find(|&i| e[i].node != Node::Boundary && e[1 - i].node == Node::Boundary) else {
                continue;
            };
            if visited.contains(&(side, id)) {
                continue;
            }
            let (mut s, mut arc, mut at) = (side, id, start);
            let x = End { node: vmap(side, e[start].node), slot: e[start].slot };
            let rx = a.read_sign(start);
            loop {
                visited.insert((s, arc));
                let cur = sides[s].arcs[&arc];
                let far = cur.ends().expect("proper")[1 - at];
                if far.node != Node::Boundary {
                    let y = End { node: vmap(s, far.node), slot: far.slot };
                    let new = Arc { label: a.label, orientation: orientation_for(rx, x.node), kind: ArcKind::Proper([x, y]) };
                    if new.read_sign(1) != cur.read_sign(1 - at) {
                        return Err(BuilderError::BoundaryMismatch);
                    }
                    out.add_arc(new.label, new.orientation, x, y);
                    break;
                }
                s = 1 - s;
                let slot = across(far.slot);
                let (next, end) = sides[s].end_at(Node::Boundary, slot).expect("sound boundary");
                arc = next;
                at = end;
            }
        }
    }
    // Whatever is left on the boundary closes up into free loops.
    for side in 0..2 {
        for (&id, a) in &sides[side].arcs {
            let Some(e) = a.ends() else { continue };
            if e.iter().any(|x| x.node != Node::Boundary) || visited.contains(&(side, id)) {
                continue;
            }
            let (mut s, mut arc, mut at) = (side, id, 0);
            loop {
                if !visited.insert((s, arc)) {
                    break;
                }
                let far = sides[s].arcs[&arc].ends().expect("proper")[1 - at];
                s = 1 - s;
                let (next, end) = sides[s].end_at(Node::Boundary, across(far.slot)).expect("sound boundary");
                arc = next;
                at = end;
            }
            // Crossing this segment from its right to its left reads the
            // orientation; left is the face after its end 1.
            let pic = sides[side];
            let left = region(side, FaceRef::Corner(landing(e[1], pic.slot_count(e[1].node))));
            let right = region(side, FaceRef::Corner(landing(e[0], pic.slot_count(e[0].node))));
            let new = out.next_arc_id();
            out.arcs.insert(new, Arc { label: a.label, orientation: 1, kind: ArcKind::FreeLoop });
            loop_seps.push((new, right, left, a.orientation));
        }
    }

    let old_region = |c: Corner| -> usize {
        match c.node {
            Node::Vertex(v) if v >= voff => region(1, FaceRef::Corner(Corner::vertex(v - voff, c.gap))),
            _ => region(0, FaceRef::Corner(c)),
        }
    };
    let root = ruf.find(region(0, bface(p1.boundary.basepoint)));
    rebuild_nesting(&mut out, |c| ruf.find(old_region(c)), root, &loop_seps.iter().map(|&(a, x, y, s)| (a, ruf.find(x), ruf.find(y), s)).collect::<Vec<_>>())?;
    out.analyze()?;
    Ok((out, pres))
}

fn bface(g: usize) -> FaceRef {
    FaceRef::Corner(Corner::new(Node::Boundary, g))
}

/// Rebuilds the nesting forest of a spherical picture from a region label
/// on every vertex corner and the two sides of every free loop.
fn rebuild_nesting(
    pic: &mut Picture,
    region_of: impl Fn(Corner) -> usize,
    root: usize,
    loops: &[(usize, usize, usize, i8)],
) -> Result<(), BuilderError> {
    pic.nesting.clear();
    let (_, faces) = pic.trace_faces();
    let (comp_of, comps) = pic.components();
    // Per region: component faces and loops touching it.
    let mut comp_faces: Vec<Vec<(usize, Corner)>> = vec![Vec::new(); comps.len()];
    let mut touching: HashMap<usize, Vec<Sep>> = HashMap::new();
    for f in &faces {
        let c = f[0];
        let comp = comp_of[&c.node];
        if comp == 0 {
            continue;
        }
        let r = region_of(c);
        comp_faces[comp].push((r, c));
        touching.entry(r).or_default().push(Sep::Comp(comp));
    }
    for (i, &(_, x, y, _)) in loops.iter().enumerate() {
        touching.entry(x).or_default().push(Sep::Loop(i));
        touching.entry(y).or_default().push(Sep::Loop(i));
    }
    let mut placed_comp = vec![false; comps.len()];
    let mut placed_loop = vec![false; loops.len()];
    let mut seen_region: HashSet<usize> = HashSet::from([root]);
    let mut queue = std::collections::VecDeque::from([(root, bface(0))]);
    while let Some((r, owner)) = queue.pop_front() {
        for sep in touching.get(&r).cloned().unwrap_or_default() {
            match sep {
                Sep::Comp(c) if !placed_comp[c] => {
                    placed_comp[c] = true;
                    let &(_, outer) = comp_faces[c].iter().find(|(fr, _)| *fr == r).expect("face in region");
                    pic.nesting.push(Nest { child: Child::Component(outer), parent: owner });
                    for &(fr, corner) in &comp_faces[c] {
                        if seen_region.insert(fr) {
                            queue.push_back((fr, FaceRef::Corner(corner)));
                        }
                    }
                }
                Sep::Loop(i) if !placed_loop[i] => {
                    placed_loop[i] = true;
                    let (arc, x, y, sign) = loops[i];
                    let (inside, orientation) = if x == r { (y, sign) } else { (x, -sign) };
                    pic.arcs.get_mut(&arc).expect("loop arc").orientation = orientation;
                    pic.nesting.push(Nest { child: Child::Loop(arc), parent: owner });
                    if seen_region.insert(inside) {
                        queue.push_back((inside, FaceRef::LoopInside(arc)));
                    }
                }
                _ => {}
            }
        }
    }
    if placed_comp.iter().skip(1).any(|p| !p) || placed_loop.iter().any(|p| !p) {
        return Err(BuilderError::Picture(PictureError::Malformed("glued regions do not form a tree".into())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Sep {
    Comp(usize),
    Loop(usize),
}

/// Factor with a literal conjugator, for tests and the command line.
pub fn factor(pres: &Presentation, conjugator: &str, relator: usize, sign: i8) -> Result<Factor, BuilderError> {
    let conjugator = pres.alphabet().parse(conjugator).map_err(|e| BuilderError::Certificate(e.to_string()))?;
    Ok(Factor { conjugator, relator, sign })
}
