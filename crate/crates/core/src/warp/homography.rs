use serde::{Deserialize, Serialize};

use super::camera::{mat_mul, CameraPose, Mat3};
use super::mesh::PageMesh;
use crate::Scalar;

/// Planar projective map acting on homogeneous 2D points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Homography<T> {
    pub m: Mat3<T>,
}

impl<T: Scalar> Homography<T> {
    pub fn identity() -> Self {
        let (o, l) = (T::zero(), T::one());
        Homography { m: [[l, o, o], [o, l, o], [o, o, l]] }
    }

    pub fn apply(&self, p: [T; 2]) -> [T; 2] {
        let m = &self.m;
        let w = m[2][0] * p[0] + m[2][1] * p[1] + m[2][2];
        [
            (m[0][0] * p[0] + m[0][1] * p[1] + m[0][2]) / w,
            (m[1][0] * p[0] + m[1][1] * p[1] + m[1][2]) / w,
        ]
    }

    pub fn then(&self, next: &Homography<T>) -> Self {
        Homography { m: mat_mul(&next.m, &self.m) }
    }

    pub fn inverse(&self) -> Option<Self> {
        let m = &self.m;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let inv = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let det = m[0][0] * inv[0][0] + m[0][1] * inv[1][0] + m[0][2] * inv[2][0];
        if det.abs() <= T::epsilon() {
            return None;
        }
        Some(Homography { m: inv.map(|row| row.map(|v| v / det)) })
    }

    /// Exact map from page pixels to image pixels for a flat sheet (z = 0)
    /// seen through `pose`.
    pub fn page_to_image(pose: &CameraPose<T>, mesh: &PageMesh<T>) -> Self {
        let [sx, sy] = mesh.meters_per_px();
        let c = pose.location;
        let o = T::zero();
        // Page (u, v, 1) -> world offset from the camera center.
        let b: Mat3<T> = [
            [-sx, o, mesh.sheet_width_m - c[0]],
            [o, sy, -c[1]],
            [o, o, -c[2]],
        ];
        let r = pose.rotation();
        let rt: Mat3<T> = [
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ];
        // Camera (X, Y, Z) -> homogeneous (f·X − cx·Z, −f·Y − cy·Z, −Z).
        let f = pose.focal_px();
        let [cx, cy] = pose.principal_point();
        let k: Mat3<T> = [[f, o, -cx], [o, -f, -cy], [o, o, -T::one()]];
        Homography { m: mat_mul(&mat_mul(&k, &rt), &b) }
    }
}
