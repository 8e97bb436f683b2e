//! Badges, stamps and signatures composited onto typeset pages. Stamps and
//! signatures are positioned by sampling grayscale heatmaps; signatures also
//! get a small random rotation and scale.

mod heatmap;
mod pack;

use std::path::{Path, PathBuf};

use image::{GrayImage, Rgba, RgbaImage, RgbImage};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use heatmap::{sample_position, HeatMap};
pub use pack::{AssetPack, ASSETS_ENV};

/// Placement attempts before giving up on an asset that keeps landing
/// partly off the page.
pub const MAX_PLACEMENT_ATTEMPTS: u32 = 16;
pub const SIGNATURE_MAX_ROTATION_DEG: f64 = 10.0;
pub const SIGNATURE_SCALE_RANGE: (f64, f64) = (0.9, 1.1);

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("heatmap has no positive pixel")]
    AllBlackMap,
    #[error("heatmap is {got:?} px but the page is {expected:?} px")]
    DimensionMismatch { expected: (u32, u32), got: (u32, u32) },
    #[error("{kind:?} did not fit on the page after {attempts} placements")]
    AssetOutOfBounds { kind: AssetKind, attempts: u32 },
    #[error("{kind:?} has no heatmap")]
    MissingHeatMap { kind: AssetKind },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssetKind {
    Stamp,
    Signature,
    Badge,
}

/// RGBA asset with either a fixed anchor (badges) or a placement heatmap.
#[derive(Clone, Debug)]
pub struct VisualAsset {
    pub kind: AssetKind,
    pub image: RgbaImage,
    /// Top-left corner for fixed-position assets.
    pub anchor: Option<(u32, u32)>,
}

/// Rotation (degrees, counter-clockwise on screen) and uniform scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetTransform {
    pub angle_deg: f64,
    pub scale: f64,
}

impl AssetTransform {
    pub const IDENTITY: AssetTransform = AssetTransform { angle_deg: 0.0, scale: 1.0 };

    pub fn is_identity(&self) -> bool {
        self.angle_deg == 0.0 && self.scale == 1.0
    }

    pub fn sample_signature(r: &mut impl Rng) -> Self {
        AssetTransform {
            angle_deg: r.gen_range(-SIGNATURE_MAX_ROTATION_DEG..=SIGNATURE_MAX_ROTATION_DEG),
            scale: r.gen_range(SIGNATURE_SCALE_RANGE.0..=SIGNATURE_SCALE_RANGE.1),
        }
    }
}

/// Where an asset ended up, in page pixels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub kind: AssetKind,
    pub x: i64,
    pub y: i64,
    pub width: u32,
    pub height: u32,
    pub transform: AssetTransform,
}

/// Rotates and scales an RGBA image about its center with bilinear sampling in
/// premultiplied alpha. The canvas grows to hold the rotated result.
pub fn transform_asset(src: &RgbaImage, t: AssetTransform) -> RgbaImage {
    if t.is_identity() {
        return src.clone();
    }
    let (w, h) = (src.width() as f64, src.height() as f64);
    let (sin, cos) = t.angle_deg.to_radians().sin_cos();
    // The epsilon keeps right angles (cos = 6e-17) from adding a column.
    let out_w = ((w * cos.abs() + h * sin.abs()) * t.scale - 1e-9).ceil() as u32 + 2;
    let out_h = ((w * sin.abs() + h * cos.abs()) * t.scale - 1e-9).ceil() as u32 + 2;
    let (ocx, ocy) = (out_w as f64 / 2.0, out_h as f64 / 2.0);
    let (scx, scy) = (w / 2.0, h / 2.0);
    let mut out = RgbaImage::new(out_w, out_h);
    for (x, y, px) in out.enumerate_pixels_mut() {
        // Inverse map: undo the scale, then rotate back. Screen y points down,
        // so a counter-clockwise turn on screen uses +sin in the y row.
        let dx = (x as f64 + 0.5 - ocx) / t.scale;
        let dy = (y as f64 + 0.5 - ocy) / t.scale;
        let sx = cos * dx - sin * dy + scx - 0.5;
        let sy = sin * dx + cos * dy + scy - 0.5;
        *px = sample_premultiplied(src, sx, sy);
    }
    out
}

fn sample_premultiplied(src: &RgbaImage, x: f64, y: f64) -> Rgba<u8> {
    let x0 = x.floor();
    let y0 = y.floor();
    let (fx, fy) = (x - x0, y - y0);
    let mut acc = [0.0f64; 4];
    for (dx, dy, wgt) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        let (ix, iy) = (x0 as i64 + dx, y0 as i64 + dy);
        if wgt == 0.0 || ix < 0 || iy < 0 || ix >= src.width() as i64 || iy >= src.height() as i64 {
            continue;
        }
        let p = src.get_pixel(ix as u32, iy as u32).0;
        let a = p[3] as f64 / 255.0;
        for c in 0..3 {
            acc[c] += wgt * p[c] as f64 * a;
        }
        acc[3] += wgt * a;
    }
    if acc[3] <= 0.0 {
        return Rgba([0, 0, 0, 0]);
    }
    let alpha = acc[3];
    Rgba([
        (acc[0] / alpha).round().clamp(0.0, 255.0) as u8,
        (acc[1] / alpha).round().clamp(0.0, 255.0) as u8,
        (acc[2] / alpha).round().clamp(0.0, 255.0) as u8,
        (alpha * 255.0).round().clamp(0.0, 255.0) as u8,
    ])
}

/// Alpha-composites `asset` over `page` with its top-left at (`x`, `y`),
/// clipping at the page edge. Fully transparent pixels leave the page as is.
pub fn composite(page: &mut RgbImage, asset: &RgbaImage, x: i64, y: i64) {
    for (ax, ay, px) in asset.enumerate_pixels() {
        let a = px[3] as u32;
        if a == 0 {
            continue;
        }
        let (tx, ty) = (x + ax as i64, y + ay as i64);
        if tx < 0 || ty < 0 || tx >= page.width() as i64 || ty >= page.height() as i64 {
            continue;
        }
        let dst = page.get_pixel_mut(tx as u32, ty as u32);
        for c in 0..3 {
            let blended = a * px[c] as u32 + (255 - a) * dst[c] as u32;
            dst[c] = ((blended + 127) / 255) as u8;
        }
    }
}

/// Places one asset on the page. Badges go to their anchor; stamps and
/// signatures are centered on a pixel drawn from `map`, redrawn when the
/// asset would cross the page edge.
pub fn place_asset(
    page: &mut RgbImage,
    asset: &VisualAsset,
    map: Option<&HeatMap>,
    r: &mut impl Rng,
) -> Result<Placement, AssetError> {
    if let Some((ax, ay)) = asset.anchor {
        composite(page, &asset.image, ax as i64, ay as i64);
        return Ok(Placement {
            kind: asset.kind,
            x: ax as i64,
            y: ay as i64,
            width: asset.image.width(),
            height: asset.image.height(),
            transform: AssetTransform::IDENTITY,
        });
    }
    let map = map.ok_or(AssetError::MissingHeatMap { kind: asset.kind })?;
    map.check_dimensions(page.width(), page.height())?;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let transform = match asset.kind {
            AssetKind::Signature => AssetTransform::sample_signature(r),
            _ => AssetTransform::IDENTITY,
        };
        let (cx, cy) = map.sample(r);
        let img = transform_asset(&asset.image, transform);
        let x = cx as i64 - (img.width() / 2) as i64;
        let y = cy as i64 - (img.height() / 2) as i64;
        let fits = x >= 0
            && y >= 0
            && x + img.width() as i64 <= page.width() as i64
            && y + img.height() as i64 <= page.height() as i64;
        if fits {
            composite(page, &img, x, y);
            return Ok(Placement {
                kind: asset.kind,
                x,
                y,
                width: img.width(),
                height: img.height(),
                transform,
            });
        }
    }
    Err(AssetError::AssetOutOfBounds { kind: asset.kind, attempts: MAX_PLACEMENT_ATTEMPTS })
}

/// A school's visual pack as stored under `visual/<school>/`.
#[derive(Clone, Debug)]
pub struct SchoolAssets {
    pub badge: VisualAsset,
    pub stamp: VisualAsset,
    pub signature: VisualAsset,
    pub stamp_map: HeatMap,
    pub signature_map: HeatMap,
}

impl SchoolAssets {
    pub fn load(dir: &Path, badge_anchor: (u32, u32)) -> Result<Self, AssetError> {
        let rgba = |name: &str| load_rgba(&dir.join(name));
        let gray = |name: &str| -> Result<HeatMap, AssetError> {
            let path = dir.join(name);
            HeatMap::new(load_gray(&path)?)
        };
        Ok(SchoolAssets {
            badge: VisualAsset { kind: AssetKind::Badge, image: rgba("badge.png")?, anchor: Some(badge_anchor) },
            stamp: VisualAsset { kind: AssetKind::Stamp, image: rgba("stamp.png")?, anchor: None },
            signature: VisualAsset { kind: AssetKind::Signature, image: rgba("signature.png")?, anchor: None },
            stamp_map: gray("stamp_map.png")?,
            signature_map: gray("signature_map.png")?,
        })
    }

    /// Badge, then stamp, then signature, in that fixed order.
    pub fn apply(&self, page: &mut RgbImage, r: &mut impl Rng) -> Result<Vec<Placement>, AssetError> {
        Ok(vec![
            place_asset(page, &self.badge, None, r)?,
            place_asset(page, &self.stamp, Some(&self.stamp_map), r)?,
            place_asset(page, &self.signature, Some(&self.signature_map), r)?,
        ])
    }
}

fn load_rgba(path: &Path) -> Result<RgbaImage, AssetError> {
    Ok(open(path)?.into_rgba8())
}

fn load_gray(path: &Path) -> Result<GrayImage, AssetError> {
    Ok(open(path)?.into_luma8())
}

fn open(path: &Path) -> Result<image::DynamicImage, AssetError> {
    image::open(path).map_err(|e| AssetError::Io { path: path.to_path_buf(), message: e.to_string() })
}
