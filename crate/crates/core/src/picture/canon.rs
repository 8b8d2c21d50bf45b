//! Canonical strings for pictures: two pictures are isomorphic (ids
//! relabelled, all structure kept) exactly when their strings agree.

use std::collections::HashMap;
use std::fmt::Write;

use super::{Analysis, Child, Corner, FaceRef, Node, Picture, PictureError};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Slot {
    Face(usize),
    LoopIn(usize),
}

impl Picture {
    /// Isomorphism invariant that is also complete.
    pub fn canonical_form(&self) -> Result<String, PictureError> {
        let an = self.analyze()?;
        let ctx = Ctx::new(self, &an);
        let start = Corner::new(Node::Boundary, self.boundary.basepoint);
        Ok(ctx.encode_from(start, &ctx.face_children()))
    }

    pub fn is_isomorphic(&self, other: &Picture) -> Result<bool, PictureError> {
        Ok(self.canonical_form()? == other.canonical_form()?)
    }

    /// Encoding of the floating component containing `v`, minimized over
    /// every starting corner and ignoring what is nested in it.
    pub(crate) fn bare_component_form(&self, an: &Analysis, v: usize) -> String {
        let ctx = Ctx::new(self, an);
        let comp = an.comp_of[&Node::Vertex(v)];
        let none = HashMap::new();
        an.comps[comp]
            .iter()
            .flat_map(|&n| (0..self.slot_count(n).max(1)).map(move |g| Corner::new(n, g)))
            .map(|c| ctx.encode_from(c, &none))
            .min()
            .unwrap_or_default()
    }
}

struct Ctx<'a> {
    pic: &'a Picture,
    an: &'a Analysis,
}

impl<'a> Ctx<'a> {
    fn new(pic: &'a Picture, an: &'a Analysis) -> Self {
        Ctx { pic, an }
    }

    fn slot_of(&self, r: FaceRef) -> Slot {
        match self.an.normalize(r) {
            FaceRef::Corner(c) => Slot::Face(self.an.face_of[&c]),
            FaceRef::LoopInside(a) => Slot::LoopIn(a),
        }
    }

    /// Sorted child encodings per face or loop inside.
    fn face_children(&self) -> HashMap<Slot, String> {
        let mut by_slot: HashMap<Slot, Vec<Child>> = HashMap::new();
        for n in &self.pic.nesting {
            by_slot.entry(self.slot_of(n.parent)).or_default().push(n.child);
        }
        let mut memo: HashMap<Slot, String> = HashMap::new();
        // Children are encoded bottom-up, so recurse from every slot.
        fn fill(ctx: &Ctx, slot: Slot, by_slot: &HashMap<Slot, Vec<Child>>, memo: &mut HashMap<Slot, String>) {
            if memo.contains_key(&slot) {
                return;
            }
            let mut encs: Vec<String> = Vec::new();
            for &ch in by_slot.get(&slot).map(Vec::as_slice).unwrap_or(&[]) {
                encs.push(match ch {
                    Child::Loop(a) => {
                        let inner = Slot::LoopIn(a);
                        fill(ctx, inner, by_slot, memo);
                        let arc = &ctx.pic.arcs[&a];
                        format!("L{}{}[{}]", arc.label, sign_char(arc.orientation), memo[&inner])
                    }
                    Child::Component(c) => {
                        let comp = ctx.an.comp_of[&c.node];
                        for f in ctx.an.comp_faces(comp) {
                            fill(ctx, Slot::Face(f), by_slot, memo);
                        }
                        let outer = ctx.an.face_of[&c];
                        ctx.an.faces[outer]
                            .iter()
                            .map(|&s| ctx.encode_from(s, memo))
                            .min()
                            .unwrap_or_default()
                    }
                });
            }
            encs.sort();
            memo.insert(slot, encs.join(","));
        }
        let slots: Vec<Slot> = by_slot.keys().copied().collect();
        for s in slots {
            fill(self, s, &by_slot, &mut memo);
        }
        memo.retain(|_, v| !v.is_empty());
        memo
    }

    /// Breadth-first numbering of the component from `start`, reading each
    /// node's slots from the gap it was entered at.
    fn encode_from(&self, start: Corner, children: &HashMap<Slot, String>) -> String {
        let pic = self.pic;
        let mut num: HashMap<Node, usize> = HashMap::new();
        let mut order = vec![start.node];
        let mut offset = vec![start.gap];
        num.insert(start.node, 0);
        let mut out = String::new();
        let mut i = 0;
        while i < order.len() {
            let node = order[i];
            let n = pic.slot_count(node);
            let off = offset[i];
            let rel = |x: usize| if n == 0 { 0 } else { (x + n - off) % n };
            let bp = pic.basepoint(node).unwrap_or(0);
            match node {
                Node::Boundary => write!(out, "B{n}.{}(", rel(bp)),
                Node::Vertex(v) => {
                    let vx = &pic.vertices[&v];
                    write!(out, "V{}{}{n}.{}(", vx.relator, sign_char(vx.sign), rel(bp))
                }
            }
            .expect("string write");
            for k in 0..n {
                let s = (off + k) % n;
                let (arc, end) = pic.end_at(node, s).expect("sound picture");
                let a = &pic.arcs[&arc];
                let o = a.ends().expect("proper arc")[1 - end];
                let j = *num.entry(o.node).or_insert_with(|| {
                    order.push(o.node);
                    offset.push(o.slot);
                    order.len() - 1
                });
                let m = pic.slot_count(o.node);
                let orel = (o.slot + m - offset[j]) % m;
                write!(out, "{}{}{j}.{orel} ", a.label, sign_char(a.read_sign(end))).expect("string write");
            }
            out.push(')');
            i += 1;
        }
        if !children.is_empty() {
            let comp = self.an.comp_of[&start.node];
            let mut listed: Vec<((usize, usize), &String)> = Vec::new();
            for f in self.an.comp_faces(comp) {
                if let Some(ch) = children.get(&Slot::Face(f)) {
                    let key = self.an.faces[f]
                        .iter()
                        .map(|c| {
                            let j = num[&c.node];
                            let n = pic.slot_count(c.node);
                            (j, if n == 0 { 0 } else { (c.gap + n - offset[j]) % n })
                        })
                        .min()
                        .expect("faces are nonempty");
                    listed.push((key, ch));
                }
            }
            listed.sort();
            for ((j, g), ch) in listed {
                write!(out, "F{j}.{g}{{{ch}}}").expect("string write");
            }
        }
        out
    }
}

fn sign_char(s: i8) -> char {
    if s < 0 {
        '-'
    } else {
        '+'
    }
}
