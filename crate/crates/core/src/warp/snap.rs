use serde::{Deserialize, Serialize};

use super::mesh::PageMesh;
use crate::annotate::AnnotationDoc;
use crate::typeset::BoxPx;
use crate::Scalar;

/// Grid vertex `(i, j)` each box corner snapped to, clockwise from top-left.
pub type Corners = [(u32, u32); 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityCorners {
    pub segment: Corners,
    pub words: Vec<Corners>,
}

/// Box-corner to mesh-vertex assignment for a whole label file, in form order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerMap {
    pub entities: Vec<EntityCorners>,
    /// Largest corner-to-vertex distance, in source pixels.
    pub max_snap_px: f64,
}

fn box_corners(b: BoxPx) -> [(f64, f64); 4] {
    let [x0, y0, x1, y1] = b.map(f64::from);
    [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
}

/// Assigns every box corner its nearest mesh vertex.
pub fn snap_boxes_to_mesh<T: Scalar>(doc: &AnnotationDoc, mesh: &PageMesh<T>) -> CornerMap {
    let mut max_snap: f64 = 0.0;
    let mut snap = |b: BoxPx| -> Corners {
        box_corners(b).map(|(u, v)| {
            let (i, j) = mesh.nearest(u, v);
            let [vu, vv] = mesh.uv(i, j);
            max_snap = max_snap.max(((vu as f64 - u).powi(2) + (vv as f64 - v).powi(2)).sqrt());
            (i, j)
        })
    };
    let entities = doc
        .form
        .iter()
        .map(|e| EntityCorners { segment: snap(e.bbox), words: e.words.iter().map(|w| snap(w.bbox)).collect() })
        .collect();
    CornerMap { entities, max_snap_px: max_snap }
}
