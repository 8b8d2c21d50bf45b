//! Pictures over a presentation as rotation systems.
//!
//! Every node (vertex disk or the boundary circle) lists the arcs meeting it
//! in positive cyclic order; gap `g` is the corner just before slot `g`.
//! Faces come from tracing the rotation system, regions from merging faces
//! through the nesting forest of floating components and free loops.

mod canon;
mod json;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::Presentation;
use crate::words::{Letter, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PictureError {
    #[error("no corner {0}")]
    InvalidCorner(Corner),
    #[error("no vertex {0}")]
    InvalidVertex(usize),
    #[error("vertices are not connected")]
    NotConnected,
    #[error("subpicture is not a closed spherical component")]
    NotSpherical,
    #[error("picture is not spherical")]
    PictureNotSpherical,
    #[error("malformed picture: {0}")]
    Malformed(String),
    #[error("json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Boundary,
    Vertex(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Boundary => write!(f, "boundary"),
            Node::Vertex(v) => write!(f, "vertex {v}"),
        }
    }
}

/// The corner of `node` just before slot `gap`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Corner {
    pub node: Node,
    pub gap: usize,
}

impl Corner {
    pub fn new(node: Node, gap: usize) -> Self {
        Corner { node, gap }
    }

    pub fn vertex(v: usize, gap: usize) -> Self {
        Corner { node: Node::Vertex(v), gap }
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} gap {}", self.node, self.gap)
    }
}

/// One attachment point of an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct End {
    pub node: Node,
    pub slot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArcKind {
    Proper([End; 2]),
    FreeLoop,
}

/// For a proper arc the letter read where it meets a node is
/// `orientation · (+1 at end 0, −1 at end 1) · (+1 on a vertex, −1 on the
/// boundary)`. For a free loop, `orientation` is the sign read when
/// crossing from outside to inside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub label: usize,
    pub orientation: i8,
    pub kind: ArcKind,
}

impl Arc {
    pub fn ends(&self) -> Option<[End; 2]> {
        match self.kind {
            ArcKind::Proper(e) => Some(e),
            ArcKind::FreeLoop => None,
        }
    }

    pub fn is_loop(&self) -> bool {
        matches!(self.kind, ArcKind::FreeLoop)
    }

    pub fn read_sign(&self, end: usize) -> i8 {
        let e = self.ends().expect("free loops have no ends")[end];
        let s = if end == 0 { 1 } else { -1 };
        let t = if e.node == Node::Boundary { -1 } else { 1 };
        self.orientation * s * t
    }
}

/// Orientation that makes an arc read `sign` at its end 0 on `node`.
pub fn orientation_for(sign: i8, node: Node) -> i8 {
    if node == Node::Boundary {
        -sign
    } else {
        sign
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub relator: usize,
    pub sign: i8,
    /// Arc ids in positive order.
    pub rotation: Vec<usize>,
    pub basepoint: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Boundary {
    pub rotation: Vec<usize>,
    pub basepoint: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceRef {
    /// The face containing this corner.
    Corner(Corner),
    /// The disk bounded by a free loop.
    LoopInside(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Child {
    /// A floating component, named by a corner on its outer face.
    Component(Corner),
    Loop(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Nest {
    pub child: Child,
    pub parent: FaceRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Picture {
    pub presentation_ref: String,
    pub vertices: BTreeMap<usize, Vertex>,
    pub boundary: Boundary,
    pub arcs: BTreeMap<usize, Arc>,
    pub nesting: Vec<Nest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    UnknownRelator { vertex: usize },
    BadSign { vertex: usize },
    SlotCount { vertex: usize, expected: usize, found: usize },
    BadBasepoint { node: Node },
    SlotMismatch { node: Node, slot: usize },
    DanglingArc { arc: usize },
    UnknownLabel { arc: usize },
    BadOrientation { arc: usize },
    Euler { node: Node, v: usize, e: usize, f: usize },
    MissingNesting { node: Node },
    DuplicateNesting { node: Node },
    BadNestingRef { entry: usize },
    UnnestedLoop { arc: usize },
    NestingCycle { entry: usize },
    CornerWordMismatch { vertex: usize },
    BasepointNotBasic { vertex: usize },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::UnknownRelator { vertex } => write!(f, "vertex {vertex}: unknown relator"),
            Issue::BadSign { vertex } => write!(f, "vertex {vertex}: sign must be +1 or -1"),
            Issue::SlotCount { vertex, expected, found } => {
                write!(f, "vertex {vertex}: {found} slots, relator has length {expected}")
            }
            Issue::BadBasepoint { node } => write!(f, "{node}: basepoint gap out of range"),
            Issue::SlotMismatch { node, slot } => write!(f, "{node}: slot {slot} does not match its arc"),
            Issue::DanglingArc { arc } => write!(f, "arc {arc}: endpoint not attached"),
            Issue::UnknownLabel { arc } => write!(f, "arc {arc}: unknown generator"),
            Issue::BadOrientation { arc } => write!(f, "arc {arc}: orientation must be +1 or -1"),
            Issue::Euler { node, v, e, f: faces } => {
                write!(f, "component of {node}: V - E + F = {v} - {e} + {faces} != 2")
            }
            Issue::MissingNesting { node } => write!(f, "component of {node} has no nesting entry"),
            Issue::DuplicateNesting { node } => write!(f, "component of {node} is nested twice"),
            Issue::BadNestingRef { entry } => write!(f, "nesting entry {entry}: bad reference"),
            Issue::UnnestedLoop { arc } => write!(f, "free loop {arc} has no nesting entry"),
            Issue::NestingCycle { entry } => write!(f, "nesting entry {entry}: cycle"),
            Issue::CornerWordMismatch { vertex } => {
                write!(f, "vertex {vertex}: corner word is not a cyclic permutation of its relator")
            }
            Issue::BasepointNotBasic { vertex } => write!(f, "vertex {vertex}: basepoint not in a basic corner"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Report {
    pub issues: Vec<Issue>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Dipole {
    pub arc: usize,
    pub c1: Corner,
    pub c2: Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FoldingPair {
    /// The positive vertex.
    pub positive: usize,
    pub negative: usize,
    pub region: FaceRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum PairClass {
    FoldingPair,
    CompleteDipole { f: usize, l: usize },
    PrimitiveDipole { f: usize, l: usize },
    NotADipole,
}

/// Faces, components and regions of a structurally sound picture.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub face_of: HashMap<Corner, usize>,
    pub faces: Vec<Vec<Corner>>,
    pub comp_of: HashMap<Node, usize>,
    /// Component 0 holds the boundary.
    pub comps: Vec<Vec<Node>>,
    pub face_comp: Vec<usize>,
    pub outer_face: Vec<Option<usize>>,
    pub comp_parent: Vec<Option<FaceRef>>,
    pub loop_parent: BTreeMap<usize, FaceRef>,
    region: Vec<usize>,
    loop_slot: HashMap<usize, usize>,
}

impl Analysis {
    pub fn face(&self, c: Corner) -> Option<usize> {
        self.face_of.get(&c).copied()
    }

    fn region_node(&self, r: FaceRef) -> Option<usize> {
        match r {
            FaceRef::Corner(c) => self.face(c),
            FaceRef::LoopInside(a) => self.loop_slot.get(&a).map(|i| self.faces.len() + i),
        }
    }

    /// Region id of a face reference.
    pub fn region(&self, r: FaceRef) -> Option<usize> {
        self.region_node(r).map(|n| self.region[n])
    }

    pub fn corner_region(&self, c: Corner) -> Option<usize> {
        self.region(FaceRef::Corner(c))
    }

    pub fn co_regional(&self, a: Corner, b: Corner) -> bool {
        matches!((self.corner_region(a), self.corner_region(b)), (Some(x), Some(y)) if x == y)
    }

    /// Replaces references to the outer face of a floating component by
    /// the face that component sits in.
    pub fn normalize(&self, mut r: FaceRef) -> FaceRef {
        for _ in 0..=self.comps.len() {
            let FaceRef::Corner(c) = r else { return r };
            let Some(f) = self.face(c) else { return r };
            let comp = self.face_comp[f];
            if comp != 0 && self.outer_face[comp] == Some(f) {
                r = self.comp_parent[comp].expect("floating components have parents");
            } else {
                return r;
            }
        }
        r
    }

    pub fn comp_faces(&self, comp: usize) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.face_comp[f] == comp).collect()
    }
}

impl Picture {
    pub fn empty() -> Self {
        Picture::default()
    }

    pub fn next_vertex_id(&self) -> usize {
        self.vertices.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn next_arc_id(&self) -> usize {
        self.arcs.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn rotation(&self, node: Node) -> Option<&[usize]> {
        match node {
            Node::Boundary => Some(&self.boundary.rotation),
            Node::Vertex(v) => self.vertices.get(&v).map(|x| x.rotation.as_slice()),
        }
    }

    pub fn slot_count(&self, node: Node) -> usize {
        self.rotation(node).map_or(0, <[usize]>::len)
    }

    fn rotation_mut(&mut self, node: Node) -> &mut Vec<usize> {
        match node {
            Node::Boundary => &mut self.boundary.rotation,
            Node::Vertex(v) => &mut self.vertices.get_mut(&v).expect("vertex exists").rotation,
        }
    }

    pub fn basepoint(&self, node: Node) -> Option<usize> {
        match node {
            Node::Boundary => Some(self.boundary.basepoint),
            Node::Vertex(v) => self.vertices.get(&v).map(|x| x.basepoint),
        }
    }

    /// Adds a vertex with unattached slots; callers fill the rotation.
    pub fn add_vertex(&mut self, relator: usize, sign: i8, slots: usize, basepoint: usize) -> usize {
        let id = self.next_vertex_id();
        self.vertices.insert(id, Vertex { relator, sign, rotation: vec![usize::MAX; slots], basepoint });
        id
    }

    /// Adds a proper arc and records it in both rotations.
    pub fn add_arc(&mut self, label: usize, orientation: i8, a: End, b: End) -> usize {
        let id = self.next_arc_id();
        self.arcs.insert(id, Arc { label, orientation, kind: ArcKind::Proper([a, b]) });
        self.rotation_mut(a.node)[a.slot] = id;
        self.rotation_mut(b.node)[b.slot] = id;
        id
    }

    /// Adds a proper arc whose end 0 reads `sign` at `a`.
    pub fn add_arc_reading(&mut self, label: usize, sign: i8, a: End, b: End) -> usize {
        self.add_arc(label, orientation_for(sign, a.node), a, b)
    }

    pub fn add_loop(&mut self, label: usize, orientation: i8, parent: FaceRef) -> usize {
        let id = self.next_arc_id();
        self.arcs.insert(id, Arc { label, orientation, kind: ArcKind::FreeLoop });
        self.nesting.push(Nest { child: Child::Loop(id), parent });
        id
    }

    /// The arc and arc end occupying a slot.
    pub fn end_at(&self, node: Node, slot: usize) -> Option<(usize, usize)> {
        let arc = *self.rotation(node)?.get(slot)?;
        let ends = self.arcs.get(&arc)?.ends()?;
        let here = End { node, slot };
        if ends[0] == here {
            Some((arc, 0))
        } else if ends[1] == here {
            Some((arc, 1))
        } else {
            None
        }
    }

    fn slot_letter(&self, node: Node, slot: usize) -> Letter {
        let (arc, end) = self.end_at(node, slot).expect("structurally sound picture");
        let a = &self.arcs[&arc];
        Letter::with_sign(a.label, a.read_sign(end))
    }

    fn node_word(&self, node: Node, gap: usize) -> Word {
        let n = self.slot_count(node);
        Word::from_letters((0..n).map(|k| self.slot_letter(node, (gap + k) % n)).collect())
    }

    fn corner_exists(&self, c: Corner) -> bool {
        self.rotation(c.node).is_some() && c.gap < self.slot_count(c.node).max(1)
    }

    /// The word read positively around a vertex from a corner.
    pub fn corner_word(&self, c: Corner) -> Result<Word, PictureError> {
        if !matches!(c.node, Node::Vertex(_)) || !self.corner_exists(c) {
            return Err(PictureError::InvalidCorner(c));
        }
        self.require_sound()?;
        Ok(self.node_word(c.node, c.gap))
    }

    fn vertex_target(&self, v: &Vertex, pres: &Presentation) -> Option<Word> {
        let r = pres.relators().get(v.relator)?;
        Some(if v.sign < 0 { r.formal_inverse() } else { r.clone() })
    }

    /// Corners whose word is exactly `r^ε`.
    pub fn basic_corners(&self, v: usize, pres: &Presentation) -> Result<Vec<Corner>, PictureError> {
        let vx = self.vertices.get(&v).ok_or(PictureError::InvalidVertex(v))?;
        self.require_sound()?;
        let target = self.vertex_target(vx, pres).ok_or(PictureError::InvalidVertex(v))?;
        let n = vx.rotation.len();
        Ok((0..n)
            .filter(|&g| self.node_word(Node::Vertex(v), g) == target)
            .map(|g| Corner::vertex(v, g))
            .collect())
    }

    /// Letters read along the boundary from the global basepoint.
    pub fn boundary_label(&self) -> Word {
        self.node_word(Node::Boundary, self.boundary.basepoint)
    }

    pub fn is_spherical(&self) -> bool {
        self.boundary.rotation.is_empty()
    }

    /// Sum of vertex signs per relator index.
    pub fn signed_vertex_count(&self, pres: &Presentation) -> Vec<i64> {
        let mut out = vec![0; pres.relators().len()];
        for v in self.vertices.values() {
            if let Some(x) = out.get_mut(v.relator) {
                *x += i64::from(v.sign);
            }
        }
        out
    }

    /// Reflection: rotations reversed, vertex signs and arc orientations
    /// flipped. Every corner word becomes the inverse of its image.
    pub fn mirror(&self) -> Picture {
        let flip_slot = |node: Node, s: usize| self.slot_count(node) - 1 - s;
        let flip_gap = |node: Node, g: usize| {
            let n = self.slot_count(node);
            if n == 0 {
                0
            } else {
                (n - g) % n
            }
        };
        let fc = |c: Corner| Corner { node: c.node, gap: flip_gap(c.node, c.gap) };
        let vertices = self
            .vertices
            .iter()
            .map(|(&id, v)| {
                let mut rotation = v.rotation.clone();
                rotation.reverse();
                let basepoint = flip_gap(Node::Vertex(id), v.basepoint);
                (id, Vertex { relator: v.relator, sign: -v.sign, rotation, basepoint })
            })
            .collect();
        let mut brot = self.boundary.rotation.clone();
        brot.reverse();
        let boundary = Boundary { rotation: brot, basepoint: flip_gap(Node::Boundary, self.boundary.basepoint) };
        let arcs = self
            .arcs
            .iter()
            .map(|(&id, a)| {
                let arc = match a.kind {
                    ArcKind::Proper(e) => Arc {
                        label: a.label,
                        orientation: -a.orientation,
                        kind: ArcKind::Proper(e.map(|x| End { node: x.node, slot: flip_slot(x.node, x.slot) })),
                    },
                    ArcKind::FreeLoop => *a,
                };
                (id, arc)
            })
            .collect();
        let nesting = self
            .nesting
            .iter()
            .map(|n| Nest {
                child: match n.child {
                    Child::Component(c) => Child::Component(fc(c)),
                    l => l,
                },
                parent: match n.parent {
                    FaceRef::Corner(c) => FaceRef::Corner(fc(c)),
                    l => l,
                },
            })
            .collect();
        Picture { presentation_ref: self.presentation_ref.clone(), vertices, boundary, arcs, nesting }
    }

    /// Next corner along the face lying to the left of the traversal.
    pub(crate) fn step(&self, c: Corner) -> Corner {
        let n = self.slot_count(c.node);
        if n == 0 {
            return c;
        }
        let leave = match c.node {
            Node::Vertex(_) => (c.gap + n - 1) % n,
            Node::Boundary => c.gap,
        };
        let (arc, end) = self.end_at(c.node, leave).expect("structurally sound picture");
        let o = self.arcs[&arc].ends().expect("proper arc")[1 - end];
        landing(o, self.slot_count(o.node))
    }

    fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        std::iter::once(Node::Boundary).chain(self.vertices.keys().map(|&v| Node::Vertex(v)))
    }

    fn all_corners(&self) -> Vec<Corner> {
        self.nodes()
            .flat_map(|n| (0..self.slot_count(n).max(1)).map(move |g| Corner { node: n, gap: g }))
            .collect()
    }

    fn slot_issues(&self, issues: &mut Vec<Issue>) {
        let mut seen: HashMap<End, usize> = HashMap::new();
        for (&id, a) in &self.arcs {
            if a.orientation != 1 && a.orientation != -1 {
                issues.push(Issue::BadOrientation { arc: id });
            }
            if let Some(ends) = a.ends() {
                for e in ends {
                    if e.slot >= self.slot_count(e.node) {
                        issues.push(Issue::DanglingArc { arc: id });
                    } else {
                        *seen.entry(e).or_default() += 1;
                    }
                }
            }
        }
        for node in self.nodes() {
            let rot = self.rotation(node).unwrap_or(&[]);
            for (slot, &arc) in rot.iter().enumerate() {
                let here = End { node, slot };
                let ok = seen.get(&here) == Some(&1)
                    && self.arcs.get(&arc).and_then(|a| a.ends()).is_some_and(|e| e.contains(&here));
                if !ok {
                    issues.push(Issue::SlotMismatch { node, slot });
                }
            }
            let bp = self.basepoint(node).unwrap_or(0);
            if bp >= rot.len().max(1) {
                issues.push(Issue::BadBasepoint { node });
            }
        }
    }

    /// Slot/rotation consistency only; everything else needs it.
    pub fn structure_issues(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        self.slot_issues(&mut issues);
        issues
    }

    fn require_sound(&self) -> Result<(), PictureError> {
        match self.structure_issues().first() {
            None => Ok(()),
            Some(i) => Err(PictureError::Malformed(i.to_string())),
        }
    }

    /// Faces by tracing; needs only slot consistency.
    pub(crate) fn trace_faces(&self) -> (HashMap<Corner, usize>, Vec<Vec<Corner>>) {
        let mut face_of = HashMap::new();
        let mut faces: Vec<Vec<Corner>> = Vec::new();
        for c in self.all_corners() {
            if face_of.contains_key(&c) {
                continue;
            }
            let id = faces.len();
            let mut cyc = Vec::new();
            let mut x = c;
            loop {
                face_of.insert(x, id);
                cyc.push(x);
                x = self.step(x);
                if x == c {
                    break;
                }
            }
            faces.push(cyc);
        }
        (face_of, faces)
    }

    /// Connected components of nodes; component 0 holds the boundary.
    pub(crate) fn components(&self) -> (HashMap<Node, usize>, Vec<Vec<Node>>) {
        let nodes: Vec<Node> = self.nodes().collect();
        let index: HashMap<Node, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut uf = UnionFind::<usize>::new(nodes.len());
        for a in self.arcs.values() {
            if let Some([x, y]) = a.ends() {
                uf.union(index[&x.node], index[&y.node]);
            }
        }
        let mut comp_ids: HashMap<usize, usize> = HashMap::new();
        let mut comps: Vec<Vec<Node>> = Vec::new();
        let mut comp_of = HashMap::new();
        for (i, &n) in nodes.iter().enumerate() {
            let root = uf.find(i);
            let c = *comp_ids.entry(root).or_insert_with(|| {
                comps.push(Vec::new());
                comps.len() - 1
            });
            comps[c].push(n);
            comp_of.insert(n, c);
        }
        (comp_of, comps)
    }

    /// Floating components that no nesting entry names.
    pub(crate) fn unnested_components(&self) -> Vec<Vec<Node>> {
        let (comp_of, comps) = self.components();
        let named: HashSet<usize> = self
            .nesting
            .iter()
            .filter_map(|n| match n.child {
                Child::Component(c) => comp_of.get(&c.node).copied(),
                Child::Loop(_) => None,
            })
            .collect();
        comps.into_iter().enumerate().skip(1).filter(|(i, _)| !named.contains(i)).map(|(_, c)| c).collect()
    }

    /// Traces faces, finds components and merges regions. Fails on any
    /// structural or nesting defect.
    pub fn analyze(&self) -> Result<Analysis, PictureError> {
        let (an, issues) = self.analyze_inner();
        match (an, issues.first()) {
            (Some(an), None) => Ok(an),
            (_, Some(i)) => Err(PictureError::Malformed(i.to_string())),
            (None, None) => Err(PictureError::Malformed("inconsistent picture".into())),
        }
    }

    fn analyze_inner(&self) -> (Option<Analysis>, Vec<Issue>) {
        let mut issues = self.structure_issues();
        if !issues.is_empty() {
            return (None, issues);
        }
        let (face_of, faces) = self.trace_faces();
        let (comp_of, comps) = self.components();
        let face_comp: Vec<usize> = faces.iter().map(|f| comp_of[&f[0].node]).collect();

        for (ci, comp) in comps.iter().enumerate() {
            let v = comp.len();
            let e = self
                .arcs
                .values()
                .filter(|a| a.ends().is_some_and(|x| comp_of[&x[0].node] == ci))
                .count();
            let f = face_comp.iter().filter(|&&c| c == ci).count();
            if v + f != e + 2 {
                issues.push(Issue::Euler { node: comp[0], v, e, f });
            }
        }

        let loops: Vec<usize> = self.arcs.iter().filter(|(_, a)| a.is_loop()).map(|(&id, _)| id).collect();
        let loop_slot: HashMap<usize, usize> = loops.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let mut outer_face = vec![None; comps.len()];
        let mut comp_parent = vec![None; comps.len()];
        let mut loop_parent = BTreeMap::new();
        let valid_ref = |r: FaceRef| match r {
            FaceRef::Corner(c) => self.corner_exists(c),
            FaceRef::LoopInside(a) => loop_slot.contains_key(&a),
        };
        for (i, n) in self.nesting.iter().enumerate() {
            if !valid_ref(n.parent) {
                issues.push(Issue::BadNestingRef { entry: i });
                continue;
            }
            match n.child {
                Child::Component(c) => {
                    if !self.corner_exists(c) {
                        issues.push(Issue::BadNestingRef { entry: i });
                        continue;
                    }
                    let comp = comp_of[&c.node];
                    if comp == 0 {
                        issues.push(Issue::BadNestingRef { entry: i });
                    } else if comp_parent[comp].is_some() {
                        issues.push(Issue::DuplicateNesting { node: c.node });
                    } else {
                        comp_parent[comp] = Some(n.parent);
                        outer_face[comp] = Some(face_of[&c]);
                    }
                }
                Child::Loop(a) => {
                    if !loop_slot.contains_key(&a) {
                        issues.push(Issue::BadNestingRef { entry: i });
                    } else if loop_parent.insert(a, n.parent).is_some() {
                        issues.push(Issue::DuplicateNesting { node: Node::Boundary });
                    }
                }
            }
        }
        for (ci, comp) in comps.iter().enumerate().skip(1) {
            if comp_parent[ci].is_none() {
                issues.push(Issue::MissingNesting { node: comp[0] });
            }
        }
        for &a in &loops {
            if !loop_parent.contains_key(&a) {
                issues.push(Issue::UnnestedLoop { arc: a });
            }
        }
        if !issues.is_empty() {
            return (None, issues);
        }

        // Every chain of parents must end at the boundary component.
        #[derive(Clone, Copy, PartialEq, Eq, Hash)]
        enum Owner {
            Comp(usize),
            Loop(usize),
        }
        let owner_of = |r: FaceRef| match r {
            FaceRef::Corner(c) => Owner::Comp(comp_of[&c.node]),
            FaceRef::LoopInside(a) => Owner::Loop(a),
        };
        let parent_of = |o: Owner| match o {
            Owner::Comp(c) => comp_parent[c],
            Owner::Loop(a) => loop_parent.get(&a).copied(),
        };
        for (i, n) in self.nesting.iter().enumerate() {
            let mut o = owner_of(n.parent);
            let mut steps = 0;
            while o != Owner::Comp(0) {
                steps += 1;
                if steps > comps.len() + loops.len() + 1 {
                    issues.push(Issue::NestingCycle { entry: i });
                    break;
                }
                match parent_of(o) {
                    Some(p) => o = owner_of(p),
                    None => break,
                }
            }
        }
        if !issues.is_empty() {
            return (None, issues);
        }

        let nf = faces.len();
        let mut ruf = UnionFind::<usize>::new(nf + loops.len());
        let node_of = |r: FaceRef| match r {
            FaceRef::Corner(c) => face_of[&c],
            FaceRef::LoopInside(a) => nf + loop_slot[&a],
        };
        for n in &self.nesting {
            if let Child::Component(c) = n.child {
                ruf.union(face_of[&c], node_of(n.parent));
            }
        }
        let region = (0..nf + loops.len()).map(|i| ruf.find(i)).collect();
        let an = Analysis {
            face_of,
            faces,
            comp_of,
            comps,
            face_comp,
            outer_face,
            comp_parent,
            loop_parent,
            region,
            loop_slot,
        };
        (Some(an), issues)
    }

    /// Full check against a presentation; an empty report means valid.
    pub fn validate(&self, pres: &Presentation) -> Report {
        let mut issues = Vec::new();
        let rank = pres.alphabet().len();
        for (&id, a) in &self.arcs {
            if a.label >= rank {
                issues.push(Issue::UnknownLabel { arc: id });
            }
        }
        for (&id, v) in &self.vertices {
            if v.sign != 1 && v.sign != -1 {
                issues.push(Issue::BadSign { vertex: id });
            }
            match pres.relators().get(v.relator) {
                None => issues.push(Issue::UnknownRelator { vertex: id }),
                Some(r) if r.len() != v.rotation.len() => {
                    issues.push(Issue::SlotCount { vertex: id, expected: r.len(), found: v.rotation.len() })
                }
                _ => {}
            }
        }
        let (_, structural) = self.analyze_inner();
        let sound = self.structure_issues().is_empty();
        issues.extend(structural);
        if sound && issues.is_empty() {
            for (&id, v) in &self.vertices {
                let target = self.vertex_target(v, pres).expect("relator checked");
                let w = self.node_word(Node::Vertex(id), 0);
                if !w.is_cyclic_permutation_of(&target) {
                    issues.push(Issue::CornerWordMismatch { vertex: id });
                } else if self.node_word(Node::Vertex(id), v.basepoint) != target {
                    issues.push(Issue::BasepointNotBasic { vertex: id });
                }
            }
        }
        Report { issues }
    }

    /// Every arc joining opposite-sign vertices of one relator through a
    /// pair of co-regional corners with mutually inverse words.
    pub fn find_dipoles(&self, pres: &Presentation) -> Result<Vec<Dipole>, PictureError> {
        let an = self.analyze()?;
        let mut out = Vec::new();
        for (&id, a) in &self.arcs {
            let Some([e0, e1]) = a.ends() else { continue };
            let (Node::Vertex(u), Node::Vertex(v)) = (e0.node, e1.node) else { continue };
            let (vu, vv) = (&self.vertices[&u], &self.vertices[&v]);
            if u == v || vu.relator != vv.relator || vu.sign != -vv.sign || vu.relator >= pres.relators().len() {
                continue;
            }
            let nu = vu.rotation.len();
            let nv = vv.rotation.len();
            let mut seen = HashSet::new();
            for gu in [e0.slot, (e0.slot + 1) % nu] {
                for gv in [e1.slot, (e1.slot + 1) % nv] {
                    let (c1, c2) = (Corner::vertex(u, gu), Corner::vertex(v, gv));
                    if !seen.insert((c1, c2)) || !an.co_regional(c1, c2) {
                        continue;
                    }
                    let w1 = self.node_word(c1.node, gu);
                    let w2 = self.node_word(c2.node, gv);
                    if w1 == w2.formal_inverse() {
                        out.push(Dipole { arc: id, c1, c2 });
                    }
                }
            }
        }
        Ok(out)
    }

    /// The component index of a closed two-vertex subpicture.
    fn pair_component(&self, an: &Analysis, u: usize, v: usize) -> Result<usize, PictureError> {
        for x in [u, v] {
            if !self.vertices.contains_key(&x) {
                return Err(PictureError::InvalidVertex(x));
            }
        }
        let cu = an.comp_of[&Node::Vertex(u)];
        if u == v || cu != an.comp_of[&Node::Vertex(v)] {
            return Err(PictureError::NotConnected);
        }
        if cu == 0 || an.comps[cu].len() != 2 {
            return Err(PictureError::NotSpherical);
        }
        Ok(cu)
    }

    fn inner_faces_empty(&self, an: &Analysis, comp: usize) -> bool {
        let outer = an.outer_face[comp];
        self.nesting.iter().all(|n| match n.parent {
            FaceRef::Corner(c) => {
                let f = an.face_of[&c];
                an.face_comp[f] != comp || Some(f) == outer
            }
            FaceRef::LoopInside(_) => true,
        })
    }

    pub(crate) fn folding_pair_in(&self, an: &Analysis, u: usize, v: usize, pres: &Presentation) -> Option<FoldingPair> {
        let comp = self.pair_component(an, u, v).ok()?;
        let (vu, vv) = (&self.vertices[&u], &self.vertices[&v]);
        if vu.relator != vv.relator || vu.sign != -vv.sign || vu.relator >= pres.relators().len() {
            return None;
        }
        if !self.inner_faces_empty(an, comp) {
            return None;
        }
        if !an.co_regional(Corner::vertex(u, vu.basepoint), Corner::vertex(v, vv.basepoint)) {
            return None;
        }
        let (positive, negative) = if vu.sign > 0 { (u, v) } else { (v, u) };
        let region = an.normalize(an.comp_parent[comp].expect("floating component"));
        Some(FoldingPair { positive, negative, region })
    }

    pub fn find_folding_pairs(&self, pres: &Presentation) -> Result<Vec<FoldingPair>, PictureError> {
        let an = self.analyze()?;
        let mut out = Vec::new();
        for comp in an.comps.iter().skip(1) {
            if let [Node::Vertex(u), Node::Vertex(v)] = comp[..] {
                if let Some(fp) = self.folding_pair_in(&an, u, v, pres) {
                    out.push(fp);
                }
            }
        }
        Ok(out)
    }

    /// Folding pair, complete dipole or primitive dipole, with `f` taken
    /// from the label `y^f` of a path joining the two basepoints.
    pub fn classify_pair(&self, v1: usize, v2: usize, pres: &Presentation) -> Result<PairClass, PictureError> {
        let an = self.analyze()?;
        self.pair_component(&an, v1, v2)?;
        let (a, b) = (&self.vertices[&v1], &self.vertices[&v2]);
        if a.relator != b.relator || a.sign != -b.sign {
            return Ok(PairClass::NotADipole);
        }
        let Some(rp) = pres.root_period(a.relator) else {
            return Ok(PairClass::NotADipole);
        };
        let (l, m) = (rp.period, rp.root.len());
        let n = a.rotation.len();
        let target = an.corner_region(Corner::vertex(v2, b.basepoint));
        // Walk positively around v1 from its basepoint until reaching the
        // region of v2's basepoint; the crossed letters form the path label.
        let Some(t) = (0..n).find(|&t| an.corner_region(Corner::vertex(v1, (a.basepoint + t) % n)) == target) else {
            return Ok(PairClass::NotADipole);
        };
        if t == 0 {
            return Ok(PairClass::FoldingPair);
        }
        if t % m != 0 {
            return Ok(PairClass::NotADipole);
        }
        let f = t / m;
        if num_integer::gcd(f, l) == 1 {
            Ok(PairClass::PrimitiveDipole { f, l })
        } else {
            Ok(PairClass::CompleteDipole { f, l })
        }
    }

    /// Drops a whole floating component and every arc touching it; entries
    /// nested in its outer face move to its parent.
    pub(crate) fn remove_component(&mut self, an: &Analysis, comp: usize) {
        let parent = an.comp_parent[comp];
        let outer = an.outer_face[comp];
        let doomed: HashSet<Node> = an.comps[comp].iter().copied().collect();
        self.nesting.retain(|n| !matches!(n.child, Child::Component(c) if doomed.contains(&c.node)));
        for n in &mut self.nesting {
            if let FaceRef::Corner(c) = n.parent {
                if doomed.contains(&c.node) {
                    debug_assert_eq!(Some(an.face_of[&c]), outer);
                    n.parent = parent.expect("floating component");
                }
            }
        }
        self.arcs.retain(|_, a| !a.ends().is_some_and(|e| doomed.contains(&e[0].node)));
        for node in doomed {
            if let Node::Vertex(v) = node {
                self.vertices.remove(&v);
            }
        }
    }
}

pub(crate) fn landing(e: End, slots: usize) -> Corner {
    let gap = match e.node {
        Node::Vertex(_) => e.slot,
        Node::Boundary => (e.slot + 1) % slots,
    };
    Corner { node: e.node, gap }
}

/// Two vertices of relator `relator` joined slot `k` to slot `n-1-k`; the
/// positive vertex reads `r` from gap 0 and the negative one reads `r⁻¹`
/// from gap `neg_basepoint`. Nested in `parent` with outer face at gap
/// `outer_gap` of the positive vertex.
pub(crate) fn insert_pair(
    pic: &mut Picture,
    pres: &Presentation,
    relator: usize,
    neg_basepoint: usize,
    parent: FaceRef,
    outer_gap: usize,
) -> (usize, usize) {
    let r = pres.relator(relator).clone();
    let n = r.len();
    let u = pic.add_vertex(relator, 1, n, 0);
    let v = pic.add_vertex(relator, -1, n, neg_basepoint);
    for (k, l) in r.letters().iter().enumerate() {
        pic.add_arc_reading(
            l.gen,
            l.sign(),
            End { node: Node::Vertex(u), slot: k },
            End { node: Node::Vertex(v), slot: n - 1 - k },
        );
    }
    pic.nesting.push(Nest { child: Child::Component(Corner::vertex(u, outer_gap % n)), parent });
    (u, v)
}
