//! Synthetic school-transcript documents with word-exact layout labels.
//!
//! The pipeline turns a requirements file into a [`config::Blueprint`], spawns
//! students and staff ([`demography`]), typesets each transcript page
//! ([`typeset`]), stamps and signs it ([`assets`]), emits FUNSD-style labels
//! ([`annotate`]) and optionally photographs the sheet through a randomized
//! pinhole camera ([`warp`]). [`audit`] reads a generated tree back and
//! produces statistics and train/val/test manifests.
//!
//! Geometry is generic over [`Scalar`] (`f32` or `f64`); the aliases below pin
//! the `f64` instantiations the pipeline uses.

pub mod annotate;
pub mod assets;
pub mod audit;
pub mod config;
pub mod demography;
mod error;
pub mod json;
pub mod pipeline;
pub mod scalar;
pub mod seed;
pub mod typeset;
pub mod warp;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Camera extrinsics/intrinsics in double precision.
pub type CameraPose = warp::camera::CameraPose<f64>;
/// Quad mesh over the A4 sheet in double precision.
pub type PageMesh = warp::mesh::PageMesh<f64>;
/// Smooth height field applied to the sheet.
pub type WarpField = warp::field::WarpField<f64>;
/// Planar projective map in double precision.
pub type Homography = warp::homography::Homography<f64>;
/// Per-vertex image coordinates produced by [`warp::project::project`].
pub type ProjectedMesh = warp::project::ProjectedMesh<f64>;

/// Version string recorded in blueprints and run manifests.
pub const TOOL_VERSION: &str = concat!("gradesynth ", env!("CARGO_PKG_VERSION"));
