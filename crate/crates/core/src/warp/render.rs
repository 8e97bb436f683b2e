use image::{GrayImage, Luma, Rgb, RgbImage};

use super::mesh::PageMesh;
use super::project::ProjectedMesh;

/// Warped sheet and its coverage mask (255 where the sheet is visible).
pub struct WarpedImage {
    pub rgb: RgbImage,
    pub mask: GrayImage,
    /// Source pyramid level sampled (0 = full resolution).
    pub mip_level: u32,
}

/// Halves `src` `level` times with a 2×2 box filter. Odd trailing rows and
/// columns are averaged with what is available.
pub fn downsample(src: &RgbImage, level: u32) -> RgbImage {
    let mut img = src.clone();
    for _ in 0..level {
        let (w, h) = (img.width().div_ceil(2), img.height().div_ceil(2));
        let mut next = RgbImage::new(w, h);
        for (x, y, px) in next.enumerate_pixels_mut() {
            let mut acc = [0u32; 3];
            let mut n = 0;
            for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (sx, sy) = (2 * x + dx, 2 * y + dy);
                if sx < img.width() && sy < img.height() {
                    let p = img.get_pixel(sx, sy);
                    for c in 0..3 {
                        acc[c] += p[c] as u32;
                    }
                    n += 1;
                }
            }
            *px = Rgb(acc.map(|a| ((a + n / 2) / n) as u8));
        }
        img = next;
    }
    img
}

/// Bilinear sample at continuous coordinates where pixel `(x, y)` covers
/// `[x, x+1) × [y, y+1)`; edges are clamped.
pub fn sample_bilinear(img: &RgbImage, u: f64, v: f64) -> [f64; 3] {
    let x = (u - 0.5).clamp(0.0, (img.width() - 1) as f64);
    let y = (v - 0.5).clamp(0.0, (img.height() - 1) as f64);
    let (x0, y0) = (x.floor() as u32, y.floor() as u32);
    let (x1, y1) = ((x0 + 1).min(img.width() - 1), (y0 + 1).min(img.height() - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let p = |xx, yy| img.get_pixel(xx, yy).0.map(f64::from);
    let (a, b, c, d) = (p(x0, y0), p(x1, y0), p(x0, y1), p(x1, y1));
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = (a[k] * (1.0 - fx) + b[k] * fx) * (1.0 - fy) + (c[k] * (1.0 - fx) + d[k] * fx) * fy;
    }
    out
}

/// Pyramid level whose texel size best matches one output pixel, given the
/// average output pixels per source pixel.
pub fn mip_level_for_scale(scale: f64) -> u32 {
    if scale >= 1.0 || scale <= 0.0 {
        0
    } else {
        ((1.0 / scale).log2().floor() as u32).min(3)
    }
}

/// Output pixels per source pixel, measured across the whole projected sheet.
pub fn sheet_scale(mesh: &PageMesh<f64>, proj: &ProjectedMesh<f64>) -> f64 {
    let (c, r) = (mesh.cols - 1, mesh.rows - 1);
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let top = d(proj.point(0, 0), proj.point(c, 0));
    let bottom = d(proj.point(0, r), proj.point(c, r));
    let left = d(proj.point(0, 0), proj.point(0, r));
    let right = d(proj.point(c, 0), proj.point(c, r));
    ((top + bottom) / (2.0 * mesh.page_width_px as f64) + (left + right) / (2.0 * mesh.page_height_px as f64)) / 2.0
}

/// Texture-maps the page onto the projected mesh: two triangles per quad,
/// texture coordinates interpolated linearly inside each (tiny) triangle and
/// sampled bilinearly from the matching source pyramid level.
pub fn render_warped(src: &RgbImage, mesh: &PageMesh<f64>, proj: &ProjectedMesh<f64>, width: u32, height: u32) -> WarpedImage {
    let level = mip_level_for_scale(sheet_scale(mesh, proj));
    let tex = downsample(src, level);
    let inv = 1.0 / f64::from(1u32 << level);
    let mut rgb = RgbImage::new(width, height);
    let mut mask = GrayImage::new(width, height);
    for j in 0..mesh.rows - 1 {
        for i in 0..mesh.cols - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let p = corners.map(|(a, b)| proj.point(a, b));
            let t = corners.map(|(a, b)| mesh.uv(a, b).map(|c| c as f64 * inv));
            for tri in [[0, 1, 2], [0, 2, 3]] {
                fill_triangle(&mut rgb, &mut mask, &tex, tri.map(|k| p[k]), tri.map(|k| t[k]));
            }
        }
    }
    WarpedImage { rgb, mask, mip_level: level }
}

fn fill_triangle(rgb: &mut RgbImage, mask: &mut GrayImage, tex: &RgbImage, p: [[f64; 2]; 3], t: [[f64; 2]; 3]) {
    let area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    if area.abs() < 1e-12 {
        return;
    }
    let (w, h) = (rgb.width() as i64, rgb.height() as i64);
    let min_x = p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min);
    let max_x = p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max);
    let min_y = p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min);
    let max_y = p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max);
    let x0 = ((min_x - 0.5).ceil() as i64).max(0);
    let x1 = ((max_x - 0.5).floor() as i64).min(w - 1);
    let y0 = ((min_y - 0.5).ceil() as i64).max(0);
    let y1 = ((max_y - 0.5).floor() as i64).min(h - 1);
    const EPS: f64 = 1e-9;
    for y in y0..=y1 {
        let cy = y as f64 + 0.5;
        for x in x0..=x1 {
            let cx = x as f64 + 0.5;
            let w0 = ((p[1][0] - cx) * (p[2][1] - cy) - (p[2][0] - cx) * (p[1][1] - cy)) / area;
            let w1 = ((p[2][0] - cx) * (p[0][1] - cy) - (p[0][0] - cx) * (p[2][1] - cy)) / area;
            let w2 = 1.0 - w0 - w1;
            if w0 < -EPS || w1 < -EPS || w2 < -EPS {
                continue;
            }
            let u = w0 * t[0][0] + w1 * t[1][0] + w2 * t[2][0];
            let v = w0 * t[0][1] + w1 * t[1][1] + w2 * t[2][1];
            let c = sample_bilinear(tex, u, v);
            rgb.put_pixel(x as u32, y as u32, Rgb(c.map(|k| k.round().clamp(0.0, 255.0) as u8)));
            mask.put_pixel(x as u32, y as u32, Luma([255]));
        }
    }
}
