use super::camera::{project_camera, CameraPose};
use super::mesh::PageMesh;
use super::WarpError;
use crate::Scalar;

/// Image positions of every mesh vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedMesh<T> {
    pub cols: u32,
    pub rows: u32,
    pub points: Vec<[T; 2]>,
    /// Whether the vertex lands inside `[0, W) × [0, H)`.
    pub visible: Vec<bool>,
}

impl<T: Scalar> ProjectedMesh<T> {
    pub fn point(&self, i: u32, j: u32) -> [T; 2] {
        self.points[(j * self.cols + i) as usize]
    }
}

/// Projects a single vertex.
pub fn project_vertex<T: Scalar>(mesh: &PageMesh<T>, pose: &CameraPose<T>, i: u32, j: u32) -> Result<[T; 2], WarpError> {
    pose.project(mesh.position(i, j)).ok_or(WarpError::DegeneratePose)
}

pub fn in_frame<T: Scalar>(p: [T; 2], width: u32, height: u32) -> bool {
    p[0] >= T::zero() && p[1] >= T::zero() && p[0] < T::lit(width as f64) && p[1] < T::lit(height as f64)
}

/// Pinhole projection of all vertices; fails if any vertex is on or behind
/// the camera plane.
pub fn project<T: Scalar>(mesh: &PageMesh<T>, pose: &CameraPose<T>) -> Result<ProjectedMesh<T>, WarpError> {
    let r = pose.rotation();
    let f = pose.focal_px();
    let pp = pose.principal_point();
    let mut points = Vec::with_capacity(mesh.vertex_count());
    let mut visible = Vec::with_capacity(mesh.vertex_count());
    for j in 0..mesh.rows {
        for i in 0..mesh.cols {
            let p = mesh.position(i, j);
            let d = [p[0] - pose.location[0], p[1] - pose.location[1], p[2] - pose.location[2]];
            let c = [
                r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2],
                r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2],
                r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2],
            ];
            let q = project_camera(c, f, pp).ok_or(WarpError::DegeneratePose)?;
            visible.push(in_frame(q, pose.width, pose.height));
            points.push(q);
        }
    }
    Ok(ProjectedMesh { cols: mesh.cols, rows: mesh.rows, points, visible })
}
