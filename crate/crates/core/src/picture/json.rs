use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Arc, ArcKind, Boundary, End, Nest, Picture, PictureError, Vertex};
use crate::words::Alphabet;

#[derive(Serialize, Deserialize)]
struct PictureDoc {
    presentation_ref: String,
    vertices: Vec<VertexDoc>,
    boundary: BoundaryDoc,
    arcs: Vec<ArcDoc>,
    nesting: Vec<Nest>,
}

#[derive(Serialize, Deserialize)]
struct VertexDoc {
    id: usize,
    relator: usize,
    sign: i8,
    rotation: Vec<usize>,
    basepoint: usize,
}

#[derive(Serialize, Deserialize)]
struct BoundaryDoc {
    rotation: Vec<usize>,
    basepoint: usize,
}

#[derive(Serialize, Deserialize)]
struct ArcDoc {
    id: usize,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    endpoints: Option<[End; 2]>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    free_loop: bool,
    orientation: i8,
}

impl Picture {
    pub fn to_json(&self, alphabet: &Alphabet) -> serde_json::Value {
        let doc = PictureDoc {
            presentation_ref: self.presentation_ref.clone(),
            vertices: self
                .vertices
                .iter()
                .map(|(&id, v)| VertexDoc {
                    id,
                    relator: v.relator,
                    sign: v.sign,
                    rotation: v.rotation.clone(),
                    basepoint: v.basepoint,
                })
                .collect(),
            boundary: BoundaryDoc { rotation: self.boundary.rotation.clone(), basepoint: self.boundary.basepoint },
            arcs: self
                .arcs
                .iter()
                .map(|(&id, a)| ArcDoc {
                    id,
                    label: if a.label < alphabet.len() { alphabet.name(a.label).to_string() } else { format!("#{}", a.label) },
                    endpoints: a.ends(),
                    free_loop: a.is_loop(),
                    orientation: a.orientation,
                })
                .collect(),
            nesting: self.nesting.clone(),
        };
        serde_json::to_value(doc).expect("pictures serialize")
    }

    pub fn to_json_string(&self, alphabet: &Alphabet) -> String {
        serde_json::to_string_pretty(&self.to_json(alphabet)).expect("pictures serialize")
    }

    /// Parses and checks slot consistency; labelling is left to `validate`.
    pub fn from_json(text: &str, alphabet: &Alphabet) -> Result<Picture, PictureError> {
        let doc: PictureDoc = serde_json::from_str(text).map_err(|e| PictureError::Json(e.to_string()))?;
        let mut vertices = BTreeMap::new();
        for v in doc.vertices {
            let vx = Vertex { relator: v.relator, sign: v.sign, rotation: v.rotation, basepoint: v.basepoint };
            if vertices.insert(v.id, vx).is_some() {
                return Err(PictureError::Json(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut arcs = BTreeMap::new();
        for a in doc.arcs {
            let label = alphabet
                .index(&a.label)
                .ok_or_else(|| PictureError::Json(format!("arc {}: unknown generator `{}`", a.id, a.label)))?;
            let kind = match (a.endpoints, a.free_loop) {
                (Some(e), false) => ArcKind::Proper(e),
                (None, true) => ArcKind::FreeLoop,
                _ => return Err(PictureError::Json(format!("arc {}: give exactly one of endpoints or free_loop", a.id))),
            };
            if arcs.insert(a.id, Arc { label, orientation: a.orientation, kind }).is_some() {
                return Err(PictureError::Json(format!("duplicate arc id {}", a.id)));
            }
        }
        let pic = Picture {
            presentation_ref: doc.presentation_ref,
            vertices,
            boundary: Boundary { rotation: doc.boundary.rotation, basepoint: doc.boundary.basepoint },
            arcs,
            nesting: doc.nesting,
        };
        if let Some(issue) = pic.structure_issues().first() {
            return Err(PictureError::Malformed(issue.to_string()));
        }
        Ok(pic)
    }
}
