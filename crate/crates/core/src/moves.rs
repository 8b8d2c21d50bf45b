//! Deformations of pictures: bridge moves, floating circles, folding pairs
//! and X-pictures, plus a greedy reducer for spherical pictures.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::picture::{
    insert_pair, landing, orientation_for, Arc, ArcKind, Child, Corner, End, FaceRef, Nest, Node, PairClass, Picture,
    PictureError,
};
use crate::presentation::{Presentation, PresentationError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("bad segment pair: {0}")]
    BadSegmentPair(String),
    #[error("not a folding pair")]
    NotAFoldingPair,
    #[error("not a copy of the X-picture")]
    NotAnXCopy,
    #[error("not a floating circle")]
    NotAFloatingCircle,
    #[error("bad reference: {0}")]
    BadReference(String),
    #[error("picture is not spherical")]
    NotSpherical,
    #[error(transparent)]
    Picture(#[from] PictureError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// Traversal of an arc starting at end `from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dart {
    pub arc: usize,
    pub from: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// Cut two arcs running along the same face (each traversed with the
    /// face on its left) and reconnect them across it.
    Bridge { first: Dart, second: Dart },
    Float { arc: usize },
    FloatInv { region: FaceRef, label: usize, orientation: i8 },
    Fold { vertices: [usize; 2] },
    FoldInv { region: FaceRef, relator: usize, outer_gap: usize },
    DeleteX { vertices: [usize; 2], xpic: usize, mirrored: bool },
    InsertX { region: FaceRef, xpic: usize, mirrored: bool, outer_gap: usize },
}

impl Move {
    pub fn is_insertion(&self) -> bool {
        matches!(self, Move::FloatInv { .. } | Move::FoldInv { .. } | Move::InsertX { .. })
    }
}

/// A based primitive dipole: the canonical pair with the negative
/// basepoint shifted by `f` root lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XPicture {
    pub relator: usize,
    pub f: usize,
    pub l: usize,
    pub picture: Picture,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct XSet {
    pub members: Vec<XPicture>,
}

/// One primitive dipole per proper-power relator and exponent `f` with
/// `gcd(f, l) = 1`, `1 ≤ f < l`.
pub fn build_xset(pres: &Presentation) -> Result<XSet, MoveError> {
    pres.require_rc()?;
    let mut members = Vec::new();
    for i in 0..pres.relators().len() {
        let Some(rp) = pres.root_period(i) else { continue };
        let (l, m, n) = (rp.period, rp.root.len(), pres.relator(i).len());
        for f in 1..l {
            if num_integer::gcd(f, l) != 1 {
                continue;
            }
            let mut picture = Picture::empty();
            insert_pair(&mut picture, pres, i, (n - f * m) % n, FaceRef::Corner(Corner::new(Node::Boundary, 0)), 0);
            debug_assert_eq!(picture.classify_pair(0, 1, pres), Ok(PairClass::PrimitiveDipole { f, l }));
            members.push(XPicture { relator: i, f, l, picture });
        }
    }
    Ok(XSet { members })
}

fn x_picture(xset: &XSet, xpic: usize, mirrored: bool) -> Result<Picture, MoveError> {
    let t = &xset.members.get(xpic).ok_or_else(|| MoveError::BadReference(format!("no X-picture {xpic}")))?.picture;
    Ok(if mirrored { t.mirror() } else { t.clone() })
}

/// Copies the single floating component of `template` into `pic`, nested
/// in `parent` with its outer face at `outer_gap` of the template's first
/// vertex.
fn embed(pic: &mut Picture, template: &Picture, parent: FaceRef, outer_gap: usize) -> Vec<usize> {
    let vbase = pic.next_vertex_id();
    let abase = pic.next_arc_id();
    let vmap = |v: usize| v + vbase;
    let nmap = |n: Node| match n {
        Node::Vertex(v) => Node::Vertex(vmap(v)),
        b => b,
    };
    let mut ids = Vec::new();
    for (&id, v) in &template.vertices {
        let mut v = v.clone();
        v.rotation = v.rotation.iter().map(|a| a + abase).collect();
        pic.vertices.insert(vmap(id), v);
        ids.push(vmap(id));
    }
    for (&id, a) in &template.arcs {
        let mut a = *a;
        if let ArcKind::Proper(e) = a.kind {
            a.kind = ArcKind::Proper(e.map(|x| End { node: nmap(x.node), slot: x.slot }));
        }
        pic.arcs.insert(id + abase, a);
    }
    let first = *template.vertices.keys().next().expect("template has vertices");
    let n = template.slot_count(Node::Vertex(first)).max(1);
    pic.nesting.push(Nest { child: Child::Component(Corner::vertex(vmap(first), outer_gap % n)), parent });
    ids
}

fn check_region(pic: &Picture, region: FaceRef) -> Result<(), MoveError> {
    let an = pic.analyze()?;
    if an.region(region).is_none() {
        return Err(MoveError::BadReference(format!("no region {region:?}")));
    }
    Ok(())
}

fn is_floating_circle(pic: &Picture, arc: usize) -> bool {
    pic.arcs.get(&arc).is_some_and(Arc::is_loop)
        && !pic.nesting.iter().any(|n| n.parent == FaceRef::LoopInside(arc))
}

/// Applies one move; the input is not modified.
pub fn apply(pic: &Picture, m: &Move, pres: &Presentation, xset: &XSet) -> Result<Picture, MoveError> {
    let mut out = pic.clone();
    match *m {
        Move::Bridge { first, second } => return bridge(pic, first, second),
        Move::Float { arc } => {
            if !is_floating_circle(pic, arc) {
                return Err(MoveError::NotAFloatingCircle);
            }
            out.arcs.remove(&arc);
            out.nesting.retain(|n| n.child != Child::Loop(arc));
        }
        Move::FloatInv { region, label, orientation } => {
            check_region(pic, region)?;
            if label >= pres.alphabet().len() || (orientation != 1 && orientation != -1) {
                return Err(MoveError::BadReference("bad loop label or orientation".into()));
            }
            out.add_loop(label, orientation, region);
        }
        Move::Fold { vertices: [a, b] } => {
            let an = pic.analyze()?;
            if pic.folding_pair_in(&an, a, b, pres).is_none() {
                return Err(MoveError::NotAFoldingPair);
            }
            out.remove_component(&an, an.comp_of[&Node::Vertex(a)]);
        }
        Move::FoldInv { region, relator, outer_gap } => {
            check_region(pic, region)?;
            if relator >= pres.relators().len() || pres.relator(relator).is_empty() {
                return Err(MoveError::BadReference(format!("no relator {relator}")));
            }
            let mut t = Picture::empty();
            insert_pair(&mut t, pres, relator, 0, FaceRef::Corner(Corner::new(Node::Boundary, 0)), 0);
            embed(&mut out, &t, region, outer_gap);
        }
        Move::DeleteX { vertices: [a, b], xpic, mirrored } => {
            let x = x_picture(xset, xpic, mirrored)?;
            let an = pic.analyze()?;
            if !is_bare_pair(pic, &an, a, b) {
                return Err(MoveError::NotAnXCopy);
            }
            let xan = x.analyze()?;
            let xfirst = *x.vertices.keys().next().expect("X-pictures have vertices");
            if pic.bare_component_form(&an, a) != x.bare_component_form(&xan, xfirst) {
                return Err(MoveError::NotAnXCopy);
            }
            out.remove_component(&an, an.comp_of[&Node::Vertex(a)]);
        }
        Move::InsertX { region, xpic, mirrored, outer_gap } => {
            check_region(pic, region)?;
            let x = x_picture(xset, xpic, mirrored)?;
            embed(&mut out, &x, region, outer_gap);
        }
    }
    out.analyze()?;
    Ok(out)
}

/// A closed floating two-vertex component with nothing nested inside it.
fn is_bare_pair(pic: &Picture, an: &crate::picture::Analysis, a: usize, b: usize) -> bool {
    let (Some(&ca), Some(&cb)) = (an.comp_of.get(&Node::Vertex(a)), an.comp_of.get(&Node::Vertex(b))) else {
        return false;
    };
    if a == b || ca != cb || ca == 0 || an.comps[ca].len() != 2 {
        return false;
    }
    let outer = an.outer_face[ca];
    pic.nesting.iter().all(|n| match n.parent {
        FaceRef::Corner(c) => {
            let f = an.face_of[&c];
            an.face_comp[f] != ca || Some(f) == outer
        }
        FaceRef::LoopInside(_) => true,
    })
}

fn bridge(pic: &Picture, d1: Dart, d2: Dart) -> Result<Picture, MoveError> {
    let bad = |s: &str| MoveError::BadSegmentPair(s.to_string());
    if d1.arc == d2.arc || d1.from > 1 || d2.from > 1 {
        return Err(bad("need two distinct arcs"));
    }
    let (a1, a2) = match (pic.arcs.get(&d1.arc), pic.arcs.get(&d2.arc)) {
        (Some(x), Some(y)) => (*x, *y),
        _ => return Err(MoveError::BadReference("unknown arc".into())),
    };
    let (Some(e1), Some(e2)) = (a1.ends(), a2.ends()) else {
        return Err(bad("free loops cannot be bridged"));
    };
    if a1.label != a2.label {
        return Err(bad("labels differ"));
    }
    let an = pic.analyze()?;
    let left = |e: [End; 2], from: usize| {
        let head = e[1 - from];
        an.face_of[&landing(head, pic.slot_count(head.node))]
    };
    if left(e1, d1.from) != left(e2, d2.from) {
        return Err(bad("segments do not bound a common face"));
    }
    let (tail1, head1) = (e1[d1.from], e1[1 - d1.from]);
    let (tail2, head2) = (e2[d2.from], e2[1 - d2.from]);
    let read = |a: &Arc, e: [End; 2], x: End| a.read_sign(if e[0] == x { 0 } else { 1 });
    let cap = |x: End, rx: i8, y: End, ry: i8| -> Result<Arc, MoveError> {
        let o = orientation_for(rx, x.node);
        let arc = Arc { label: a1.label, orientation: o, kind: ArcKind::Proper([x, y]) };
        if arc.read_sign(1) != ry {
            return Err(bad("normal orientations are not compatible"));
        }
        Ok(arc)
    };
    let b1 = cap(head1, read(&a1, e1, head1), tail2, read(&a2, e2, tail2))?;
    let b2 = cap(head2, read(&a2, e2, head2), tail1, read(&a1, e1, tail1))?;

    let mut out = pic.clone();
    out.arcs.insert(d1.arc, b1);
    out.arcs.insert(d2.arc, b2);
    for (x, id) in [(head1, d1.arc), (tail2, d1.arc), (head2, d2.arc), (tail1, d2.arc)] {
        set_slot(&mut out, x, id);
    }

    // A split component leaves one piece without a nesting entry; it goes
    // into the band-side face of the other piece.
    let comps = out.unnested_components();
    match comps.as_slice() {
        [] => {}
        [piece] => {
            let band = |cap: &Arc| {
                let [x, y] = cap.ends().expect("proper");
                (landing(y, out.slot_count(y.node)), landing(x, out.slot_count(x.node)))
            };
            let (b1_band, b1_fside) = band(&b1);
            let (b2_band, b2_fside) = band(&b2);
            let (in_piece, other) = if piece.contains(&head1.node) {
                ((b1_band, b1_fside), (b2_band, b2_fside))
            } else {
                ((b2_band, b2_fside), (b1_band, b1_fside))
            };
            let (face_of, _) = out.trace_faces();
            if face_of[&in_piece.0] == face_of[&in_piece.1] || face_of[&other.0] == face_of[&other.1] {
                return Err(bad("ambiguous split"));
            }
            out.nesting.push(Nest { child: Child::Component(in_piece.0), parent: FaceRef::Corner(other.0) });
        }
        _ => return Err(bad("unexpected split")),
    }
    out.analyze()?;
    Ok(out)
}

fn set_slot(pic: &mut Picture, e: End, arc: usize) {
    match e.node {
        Node::Boundary => pic.boundary.rotation[e.slot] = arc,
        Node::Vertex(v) => pic.vertices.get_mut(&v).expect("vertex").rotation[e.slot] = arc,
    }
}

/// The faces met while walking along each side of every proper arc,
/// grouped by face: darts whose left side is that face.
pub fn face_darts(pic: &Picture) -> Result<Vec<Vec<Dart>>, MoveError> {
    let an = pic.analyze()?;
    let mut out = vec![Vec::new(); an.faces.len()];
    for (&id, a) in &pic.arcs {
        let Some(e) = a.ends() else { continue };
        for from in 0..2 {
            let head = e[1 - from];
            let f = an.face_of[&landing(head, pic.slot_count(head.node))];
            out[f].push(Dart { arc: id, from });
        }
    }
    Ok(out)
}

/// Every applicable move, insertions included, in a fixed order.
pub fn legal_moves(pic: &Picture, pres: &Presentation, xset: &XSet) -> Result<Vec<Move>, MoveError> {
    let cands = candidate_moves(pic, pres, xset)?;
    Ok(cands.into_iter().filter(|m| apply(pic, m, pres, xset).is_ok()).collect())
}

/// Superset of [`legal_moves`] that skips the final applicability check:
/// bridges between equally labelled darts of a face, reducing moves, and
/// insertions into one face of each region.
pub fn candidate_moves(pic: &Picture, pres: &Presentation, xset: &XSet) -> Result<Vec<Move>, MoveError> {
    let mut cands = Vec::new();
    for darts in face_darts(pic)? {
        for (i, &d1) in darts.iter().enumerate() {
            for &d2 in &darts[i + 1..] {
                if d1.arc != d2.arc && pic.arcs[&d1.arc].label == pic.arcs[&d2.arc].label {
                    cands.push(Move::Bridge { first: d1, second: d2 });
                }
            }
        }
    }
    cands.extend(reducing_moves(pic, pres, xset)?);
    for region in region_representatives(pic)? {
        for label in 0..pres.alphabet().len() {
            for orientation in [1, -1] {
                cands.push(Move::FloatInv { region, label, orientation });
            }
        }
        for relator in 0..pres.relators().len() {
            cands.push(Move::FoldInv { region, relator, outer_gap: 0 });
        }
        for xpic in 0..xset.members.len() {
            for mirrored in [false, true] {
                cands.push(Move::InsertX { region, xpic, mirrored, outer_gap: 0 });
            }
        }
    }
    Ok(cands)
}

/// One face reference per region.
pub fn region_representatives(pic: &Picture) -> Result<Vec<FaceRef>, MoveError> {
    let an = pic.analyze()?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let loops = pic.arcs.iter().filter(|(_, a)| a.is_loop()).map(|(&id, _)| FaceRef::LoopInside(id));
    let faces = an.faces.iter().map(|f| FaceRef::Corner(f[0]));
    for r in faces.chain(loops) {
        if seen.insert(an.region(r)) {
            out.push(an.normalize(r));
        }
    }
    Ok(out)
}

/// Float, Fold and DeleteX candidates that apply, in that order.
pub fn reducing_moves(pic: &Picture, pres: &Presentation, xset: &XSet) -> Result<Vec<Move>, MoveError> {
    let an = pic.analyze()?;
    let mut out = Vec::new();
    for (&id, a) in &pic.arcs {
        if a.is_loop() && is_floating_circle(pic, id) {
            out.push(Move::Float { arc: id });
        }
    }
    let pairs: Vec<[usize; 2]> = an
        .comps
        .iter()
        .skip(1)
        .filter_map(|c| match c[..] {
            [Node::Vertex(u), Node::Vertex(v)] => Some([u, v]),
            _ => None,
        })
        .collect();
    for &[u, v] in &pairs {
        if pic.folding_pair_in(&an, u, v, pres).is_some() {
            out.push(Move::Fold { vertices: [u, v] });
        }
    }
    for &[u, v] in &pairs {
        for (xpic, x) in xset.members.iter().enumerate() {
            if x.relator != pic.vertices[&u].relator {
                continue;
            }
            for mirrored in [false, true] {
                let m = Move::DeleteX { vertices: [u, v], xpic, mirrored };
                if apply(pic, &m, pres, xset).is_ok() {
                    out.push(m);
                }
            }
        }
    }
    Ok(out)
}

/// A move undoing `m` on `before`, for Float±, Fold± and DeleteX/InsertX.
pub fn inverse(before: &Picture, m: &Move, pres: &Presentation, xset: &XSet) -> Result<Option<Move>, MoveError> {
    let after = apply(before, m, pres, xset)?;
    let an = before.analyze()?;
    let candidates: Vec<Move> = match *m {
        Move::Bridge { .. } => return Ok(None),
        Move::Float { arc } => {
            let a = before.arcs[&arc];
            let region = an.loop_parent[&arc];
            vec![Move::FloatInv { region: an.normalize(region), label: a.label, orientation: a.orientation }]
        }
        Move::FloatInv { .. } => vec![Move::Float { arc: before.next_arc_id() }],
        Move::FoldInv { .. } => {
            let v = before.next_vertex_id();
            vec![Move::Fold { vertices: [v, v + 1] }]
        }
        Move::InsertX { xpic, mirrored, .. } => {
            let v = before.next_vertex_id();
            vec![Move::DeleteX { vertices: [v, v + 1], xpic, mirrored }]
        }
        Move::Fold { vertices: [a, _] } | Move::DeleteX { vertices: [a, _], .. } => {
            let comp = an.comp_of[&Node::Vertex(a)];
            let region = an.normalize(an.comp_parent[comp].expect("floating"));
            let relator = before.vertices[&a].relator;
            let n = before.vertices[&a].rotation.len();
            (0..n)
                .map(|outer_gap| match *m {
                    Move::Fold { .. } => Move::FoldInv { region, relator, outer_gap },
                    Move::DeleteX { xpic, mirrored, .. } => {
                        Move::InsertX { region, xpic, mirrored, outer_gap }
                    }
                    _ => unreachable!(),
                })
                .collect()
        }
    };
    for c in candidates {
        if let Ok(back) = apply(&after, &c, pres, xset) {
            if back.is_isomorphic(before)? {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub picture: Picture,
    pub trace: Vec<Move>,
    pub emptied: bool,
}

/// Greedy reduction by Float, Fold and DeleteX moves, each of which lowers
/// the vertex or arc count. Never inserts anything.
pub fn reduce_spherical(pic: &Picture, xset: &XSet, pres: &Presentation, budget: usize) -> Result<Reduction, MoveError> {
    if !pic.is_spherical() {
        return Err(MoveError::NotSpherical);
    }
    let mut cur = pic.clone();
    let mut trace = Vec::new();
    while trace.len() < budget {
        let Some(m) = reducing_moves(&cur, pres, xset)?.into_iter().next() else { break };
        cur = apply(&cur, &m, pres, xset)?;
        trace.push(m);
    }
    let emptied = cur.vertices.is_empty() && cur.arcs.is_empty();
    Ok(Reduction { picture: cur, trace, emptied })
}

/// Applies a trace move by move.
pub fn replay(pic: &Picture, trace: &[Move], pres: &Presentation, xset: &XSet) -> Result<Picture, MoveError> {
    trace.iter().try_fold(pic.clone(), |p, m| apply(&p, m, pres, xset))
}
