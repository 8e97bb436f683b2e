//! Photographs a typeset page: the sheet is meshed, optionally bent by a
//! smooth height field, seen through a randomized pinhole camera, rendered,
//! and its label boxes are carried through the same projection.

pub mod camera;
pub mod field;
pub mod filter;
pub mod homography;
pub mod mesh;
pub mod photometric;
pub mod project;
pub mod remap;
pub mod render;
pub mod snap;

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::AnnotationDoc;
use crate::config::VisualPlan;
use crate::seed::child_seed;

pub use camera::{sample_pose, CameraPose};
pub use field::{sample_field, WarpField};
pub use filter::{filter_validity, FilterReason, Validity};
pub use homography::Homography;
pub use mesh::{PageMesh, DEFAULT_PITCH_PX};
pub use photometric::{photometric_stage, PhotometricTags};
pub use project::{project, project_vertex, ProjectedMesh};
pub use remap::{remap_boxes, Remapped};
pub use render::{render_warped, WarpedImage};
pub use snap::{snap_boxes_to_mesh, CornerMap};

pub const SHEET_WIDTH_M: f64 = 0.210;
pub const SHEET_HEIGHT_M: f64 = 0.297;
pub const OUTPUT_WIDTH: u32 = 1920;
pub const OUTPUT_HEIGHT: u32 = 2560;
/// Pose/field draws tried before a sample is given up as filtered.
pub const MAX_ATTEMPTS: u32 = 4;

#[derive(Debug, Error)]
pub enum WarpError {
    #[error("mesh vertex at or behind the camera plane")]
    DegeneratePose,
}

/// What the warp stage gets to work on: a rendered page, or only its size
/// when just the labels are carried through the camera.
#[derive(Clone, Copy, Debug)]
pub enum WarpInput<'a> {
    Raster(&'a RgbImage),
    Size(u32, u32),
}

impl WarpInput<'_> {
    pub fn dimensions(&self) -> (u32, u32) {
        match self {
            WarpInput::Raster(img) => img.dimensions(),
            WarpInput::Size(w, h) => (*w, *h),
        }
    }
}

/// Everything needed to reproduce or audit one warped sample. Stored as JSON
/// beside the label file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarpMetadata {
    pub attempts: u32,
    pub valid: bool,
    pub reasons: Vec<FilterReason>,
    pub pose: CameraPose<f64>,
    pub field: WarpField<f64>,
    pub mesh_pitch_px: u32,
    pub max_snap_px: f64,
    pub max_slope: f64,
    pub clipped_words: usize,
    pub total_words: usize,
    pub visual: VisualPlan,
    pub mip_level: Option<u32>,
    pub photometric: Option<PhotometricTags>,
}

impl WarpMetadata {
    /// The first draw was rejected and a later one used instead.
    pub fn reprocessed(&self) -> bool {
        self.attempts > 1
    }
}

pub struct WarpOutput {
    pub image: Option<RgbImage>,
    pub doc: AnnotationDoc,
    pub metadata: WarpMetadata,
}

/// Seed of retry `attempt` (0-based); the first attempt uses `warp_seed`.
pub fn attempt_seed(warp_seed: u64, attempt: u32) -> u64 {
    if attempt == 0 {
        warp_seed
    } else {
        child_seed(warp_seed, "retry", attempt as u64)
    }
}

/// Warps one page. Pose and field are redrawn up to `MAX_ATTEMPTS` times
/// until the remapped labels pass [`filter_validity`]; if none passes, the
/// last draw is returned with `valid = false`. Pixels are rendered only for
/// the accepted draw.
pub fn warp_sample(
    page: WarpInput<'_>,
    doc: &AnnotationDoc,
    plan: &VisualPlan,
    warp_seed: u64,
    photometric_seed: u64,
) -> Result<WarpOutput, WarpError> {
    let (pw, ph) = page.dimensions();
    let base = PageMesh::<f64>::new(pw, ph, DEFAULT_PITCH_PX, SHEET_WIDTH_M, SHEET_HEIGHT_M);
    let corners = snap_boxes_to_mesh(doc, &base);
    let mut attempt = 0;
    loop {
        let seed = attempt_seed(warp_seed, attempt);
        let pose = sample_pose(child_seed(seed, "pose", 0));
        let field = sample_field(child_seed(seed, "field", 0), plan.cloth);
        let mesh = base.clone().with_field(field.clone());
        let (w, h) = (pose.width, pose.height);

        let projected = match page {
            WarpInput::Raster(_) => Some(project(&mesh, &pose)?),
            WarpInput::Size(..) => None,
        };
        let remapped = match &projected {
            Some(p) => remap_boxes(doc, &corners, |i, j| Ok(p.point(i, j)), w, h)?,
            None => remap_boxes(doc, &corners, |i, j| project_vertex(&mesh, &pose, i, j), w, h)?,
        };
        let validity = filter_validity(&remapped, &field);
        attempt += 1;
        if !validity.valid && attempt < MAX_ATTEMPTS {
            continue;
        }

        let mut metadata = WarpMetadata {
            attempts: attempt,
            valid: validity.valid,
            reasons: validity.reasons,
            pose,
            field,
            mesh_pitch_px: DEFAULT_PITCH_PX,
            max_snap_px: corners.max_snap_px,
            max_slope: validity.max_slope,
            clipped_words: validity.clipped_words,
            total_words: validity.total_words,
            visual: plan.clone(),
            mip_level: None,
            photometric: None,
        };
        let image = match (page, projected) {
            (WarpInput::Raster(page), Some(p)) => {
                let mut warped = render_warped(page, &mesh, &p, w, h);
                metadata.photometric = Some(photometric_stage(&mut warped.rgb, &warped.mask, plan, photometric_seed));
                metadata.mip_level = Some(warped.mip_level);
                Some(warped.rgb)
            }
            _ => None,
        };
        return Ok(WarpOutput { image, doc: remapped.doc, metadata });
    }
}

#[cfg(test)]
mod tests;
