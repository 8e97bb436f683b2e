use serde::{Deserialize, Serialize};

use super::project::in_frame;
use super::snap::{CornerMap, Corners};
use super::WarpError;
use crate::annotate::AnnotationDoc;
use crate::typeset::{union, BoxPx};

/// Remapped labels plus which words had a corner outside the frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Remapped {
    pub doc: AnnotationDoc,
    pub clipped_words: usize,
    pub total_words: usize,
}

/// Replaces every box with the axis-aligned hull of its projected snapped
/// corners, clamped to the `width` × `height` frame. A segment box also covers
/// its words' boxes so containment survives rounding. Texts, labels and links
/// are untouched.
pub fn remap_boxes(
    doc: &AnnotationDoc,
    corners: &CornerMap,
    mut project: impl FnMut(u32, u32) -> Result<[f64; 2], WarpError>,
    width: u32,
    height: u32,
) -> Result<Remapped, WarpError> {
    let mut out = doc.clone();
    let mut clipped_words = 0;
    let mut total_words = 0;
    let mut hull = |c: &Corners| -> Result<(BoxPx, bool), WarpError> {
        let mut pts = [[0.0; 2]; 4];
        for (k, &(i, j)) in c.iter().enumerate() {
            pts[k] = project(i, j)?;
        }
        let clipped = pts.iter().any(|p| !in_frame(*p, width, height));
        Ok((clamp_box(aabb(&pts), width, height), clipped))
    };
    for (entity, ec) in out.form.iter_mut().zip(&corners.entities) {
        let (mut seg, _) = hull(&ec.segment)?;
        for (word, wc) in entity.words.iter_mut().zip(&ec.words) {
            let (b, clipped) = hull(wc)?;
            word.bbox = b;
            seg = union(seg, b);
            total_words += 1;
            clipped_words += clipped as usize;
        }
        entity.bbox = seg;
    }
    Ok(Remapped { doc: out, clipped_words, total_words })
}

fn aabb(pts: &[[f64; 2]; 4]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for p in pts {
        b[0] = b[0].min(p[0]);
        b[1] = b[1].min(p[1]);
        b[2] = b[2].max(p[0]);
        b[3] = b[3].max(p[1]);
    }
    b
}

/// Rounds outwards and clamps to the frame. A box that falls entirely off
/// one edge keeps a one-pixel sliver on that edge so it stays well-formed.
fn clamp_box(b: [f64; 4], width: u32, height: u32) -> BoxPx {
    let (w, h) = (width as i32, height as i32);
    let mut x0 = (b[0].floor() as i64).clamp(0, w as i64 - 1) as i32;
    let mut y0 = (b[1].floor() as i64).clamp(0, h as i64 - 1) as i32;
    let x1 = (b[2].ceil() as i64).clamp(1, w as i64) as i32;
    let y1 = (b[3].ceil() as i64).clamp(1, h as i64) as i32;
    if x0 >= x1 {
        x0 = x1 - 1;
    }
    if y0 >= y1 {
        y0 = y1 - 1;
    }
    [x0, y0, x1, y1]
}
