use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::seed::rng;
use crate::Scalar;

use super::{OUTPUT_HEIGHT, OUTPUT_WIDTH, SHEET_HEIGHT_M, SHEET_WIDTH_M};

/// Distribution of the randomized camera pose: (mean, standard deviation).
pub const Z_DIST_M: (f64, f64) = (0.55, 0.05);
pub const RX_DIST_DEG: (f64, f64) = (0.0, 1.0);
pub const RY_DIST_DEG: (f64, f64) = (0.0, 4.0);
pub const RZ_DIST_DEG: (f64, f64) = (180.0, 5.0);
pub const FOCAL_MM: f64 = 50.0;
pub const SENSOR_WIDTH_MM: f64 = 36.0;
/// Recorded for completeness; depth of field is not simulated.
pub const F_STOP: f64 = 2.8;

/// Pinhole camera above the sheet. Rotations are XYZ Euler angles in degrees
/// applied as `R = Rz · Ry · Rx`; with zero rotation the camera looks down
/// its local −Z axis with +Y up in the image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraPose<T> {
    pub location: [T; 3],
    pub rotation_deg: [T; 3],
    pub focal_mm: T,
    pub sensor_width_mm: T,
    pub width: u32,
    pub height: u32,
    pub f_stop: T,
}

pub type Mat3<T> = [[T; 3]; 3];

impl<T: Scalar> CameraPose<T> {
    /// Every parameter at its distribution mean: centered over the sheet,
    /// looking straight down, rolled 180°.
    pub fn mean() -> Self {
        CameraPose {
            location: [T::lit(SHEET_WIDTH_M / 2.0), T::lit(SHEET_HEIGHT_M / 2.0), T::lit(Z_DIST_M.0)],
            rotation_deg: [T::lit(RX_DIST_DEG.0), T::lit(RY_DIST_DEG.0), T::lit(RZ_DIST_DEG.0)],
            focal_mm: T::lit(FOCAL_MM),
            sensor_width_mm: T::lit(SENSOR_WIDTH_MM),
            width: OUTPUT_WIDTH,
            height: OUTPUT_HEIGHT,
            f_stop: T::lit(F_STOP),
        }
    }

    /// Focal length in pixels (square pixels, sensor width fit to `width`).
    pub fn focal_px(&self) -> T {
        self.focal_mm / self.sensor_width_mm * T::lit(self.width as f64)
    }

    pub fn principal_point(&self) -> [T; 2] {
        [T::lit(self.width as f64) / T::lit(2.0), T::lit(self.height as f64) / T::lit(2.0)]
    }

    /// Camera-to-world rotation.
    pub fn rotation(&self) -> Mat3<T> {
        let [rx, ry, rz] = self.rotation_deg.map(|d| d.to_radians());
        let (sx, cx) = rx.sin_cos();
        let (sy, cy) = ry.sin_cos();
        let (sz, cz) = rz.sin_cos();
        let (o, l) = (T::zero(), T::one());
        let mx = [[l, o, o], [o, cx, -sx], [o, sx, cx]];
        let my = [[cy, o, sy], [o, l, o], [-sy, o, cy]];
        let mz = [[cz, -sz, o], [sz, cz, o], [o, o, l]];
        mat_mul(&mat_mul(&mz, &my), &mx)
    }

    /// World point in camera coordinates.
    pub fn to_camera(&self, p: [T; 3]) -> [T; 3] {
        let r = self.rotation();
        let d = [p[0] - self.location[0], p[1] - self.location[1], p[2] - self.location[2]];
        // Rᵀ · d
        [
            r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2],
            r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2],
            r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2],
        ]
    }

    /// Image position (column, row) of a world point, or `None` when the point
    /// is on or behind the camera plane.
    pub fn project(&self, p: [T; 3]) -> Option<[T; 2]> {
        project_camera(self.to_camera(p), self.focal_px(), self.principal_point())
    }
}

/// Projects a camera-space point; columns grow rightwards, rows downwards.
pub fn project_camera<T: Scalar>(c: [T; 3], f: T, pp: [T; 2]) -> Option<[T; 2]> {
    let depth = -c[2];
    if depth <= T::zero() {
        return None;
    }
    Some([pp[0] + f * c[0] / depth, pp[1] - f * c[1] / depth])
}

pub fn mat_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

/// Pose drawn from the randomized camera distributions; x and y stay at
/// the sheet center.
pub fn sample_pose(seed: u64) -> CameraPose<f64> {
    let mut r = rng(seed);
    let mut normal = |(mean, sd): (f64, f64)| Normal::new(mean, sd).expect("valid normal").sample(&mut r);
    let mut pose = CameraPose::<f64>::mean();
    pose.location[2] = normal(Z_DIST_M);
    pose.rotation_deg = [normal(RX_DIST_DEG), normal(RY_DIST_DEG), normal(RZ_DIST_DEG)];
    pose
}
