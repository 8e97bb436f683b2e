use serde::{Deserialize, Serialize};

use super::field::WarpField;
use crate::Scalar;

/// Default vertex spacing in source pixels (≈0.17 mm at 300 DPI).
pub const DEFAULT_PITCH_PX: u32 = 2;

/// Regular quad grid over the sheet. Vertex `(i, j)` sits at source pixel
/// `(i·pitch, j·pitch)`, clamped to the page edge, and at world point
/// `(sheet_width − u·sx, v·sy, z(x, y))`: the page is mirrored in x so that a
/// camera rolled 180° sees it upright.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageMesh<T> {
    pub cols: u32,
    pub rows: u32,
    pub pitch_px: u32,
    pub page_width_px: u32,
    pub page_height_px: u32,
    pub sheet_width_m: T,
    pub sheet_height_m: T,
    pub field: WarpField<T>,
}

impl<T: Scalar> PageMesh<T> {
    pub fn new(page_width_px: u32, page_height_px: u32, pitch_px: u32, sheet_width_m: T, sheet_height_m: T) -> Self {
        PageMesh {
            cols: page_width_px.div_ceil(pitch_px) + 1,
            rows: page_height_px.div_ceil(pitch_px) + 1,
            pitch_px,
            page_width_px,
            page_height_px,
            sheet_width_m,
            sheet_height_m,
            field: WarpField::flat(),
        }
    }

    pub fn with_field(mut self, field: WarpField<T>) -> Self {
        self.field = field;
        self
    }

    pub fn vertex_count(&self) -> usize {
        (self.cols * self.rows) as usize
    }

    pub fn index(&self, i: u32, j: u32) -> u32 {
        j * self.cols + i
    }

    pub fn grid(&self, index: u32) -> (u32, u32) {
        (index % self.cols, index / self.cols)
    }

    /// Pitch in meters along x and y.
    pub fn pitch_m(&self) -> [T; 2] {
        let [sx, sy] = self.meters_per_px();
        [sx * T::lit(self.pitch_px as f64), sy * T::lit(self.pitch_px as f64)]
    }

    pub fn meters_per_px(&self) -> [T; 2] {
        [
            self.sheet_width_m / T::lit(self.page_width_px as f64),
            self.sheet_height_m / T::lit(self.page_height_px as f64),
        ]
    }

    /// Source pixel coordinates of vertex `(i, j)`.
    pub fn uv(&self, i: u32, j: u32) -> [u32; 2] {
        [(i * self.pitch_px).min(self.page_width_px), (j * self.pitch_px).min(self.page_height_px)]
    }

    /// Undisplaced sheet point of page pixel coordinates (u, v).
    pub fn sheet_point(&self, u: T, v: T) -> [T; 2] {
        let [sx, sy] = self.meters_per_px();
        [self.sheet_width_m - u * sx, v * sy]
    }

    /// Displaced world position of vertex `(i, j)`.
    pub fn position(&self, i: u32, j: u32) -> [T; 3] {
        let [u, v] = self.uv(i, j);
        let [x, y] = self.sheet_point(T::lit(u as f64), T::lit(v as f64));
        [x, y, self.field.z(x, y)]
    }

    /// Nearest vertex to page pixel coordinates (u, v).
    pub fn nearest(&self, u: f64, v: f64) -> (u32, u32) {
        let snap = |c: f64, limit: u32, count: u32| {
            let clamped = c.clamp(0.0, limit as f64);
            let i = (clamped / self.pitch_px as f64).round() as u32;
            // The last vertex may sit closer than a full pitch to its
            // neighbour; pick whichever of the two is nearer.
            let i = i.min(count - 1);
            if i + 1 == count {
                let prev = ((i - 1) * self.pitch_px) as f64;
                if (clamped - prev).abs() < (clamped - limit as f64).abs() {
                    return i - 1;
                }
            }
            i
        };
        (snap(u, self.page_width_px, self.cols), snap(v, self.page_height_px, self.rows))
    }
}
