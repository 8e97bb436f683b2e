//! Regenerates the per-school visual packs under `assets/visual/<template>/`
//! from the bundled templates: badge, stamp and signature images plus the
//! page-sized heatmaps that steer stamp and signature placement.
//!
//! ```text
//! cargo run --release --example build_assets [-- <assets dir>]
//! ```

use std::path::PathBuf;

use ab_glyph::{point, Font, PxScale, ScaleFont};
use gradesynth::assets::AssetPack;
use gradesynth::seed::{child_seed, rng};
use gradesynth::typeset::fonts::fonts;
use gradesynth::typeset::{mm_to_px, Area, FontId, TemplateSpec};
use image::{GrayImage, Luma, Rgba, RgbaImage};
use rand::Rng;

const BADGE_PX: u32 = 236;
const STAMP_PX: u32 = 300;
const SIGNATURE_PX: (u32, u32) = (480, 150);

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pack = match std::env::args().nth(1) {
        Some(dir) => AssetPack::at(PathBuf::from(dir)),
        None => AssetPack::bundled(),
    };
    let mut ids: Vec<PathBuf> = std::fs::read_dir(pack.templates_dir())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    ids.sort();
    for path in ids {
        let t = TemplateSpec::load(&path)?;
        let seed = child_seed(0x5EED_A55E7, &t.id, 0);
        let dir = pack.visual_dir(&t.id);
        std::fs::create_dir_all(&dir)?;
        let initials = initials(&t.school);
        let (w, h) = (t.page.width_px(), t.page.height_px());
        badge(&initials, seed).save(dir.join("badge.png"))?;
        stamp(&initials, seed).save(dir.join("stamp.png"))?;
        signature(seed).save(dir.join("signature.png"))?;
        heatmap(w, h, &t.assets.stamp_area).save(dir.join("stamp_map.png"))?;
        heatmap(w, h, &t.assets.signature_area).save(dir.join("signature_map.png"))?;
        println!("{}: {}", t.id, dir.display());
    }
    Ok(())
}

fn initials(name: &str) -> String {
    let skip = ["de", "del", "la", "high", "school", "colegio", "instituto", "senior", "the"];
    let words: Vec<&str> = name.split_whitespace().filter(|w| !skip.contains(&w.to_lowercase().as_str())).collect();
    words.iter().take(3).filter_map(|w| w.chars().next()).collect::<String>().to_uppercase()
}

/// Blends `color` with `coverage` over `img[x, y]`, keeping the stronger alpha.
fn paint(img: &mut RgbaImage, x: i64, y: i64, color: [u8; 3], coverage: f64) {
    if x < 0 || y < 0 || x >= img.width() as i64 || y >= img.height() as i64 || coverage <= 0.0 {
        return;
    }
    let px = img.get_pixel_mut(x as u32, y as u32);
    let a = (coverage.min(1.0) * 255.0).round() as u8;
    if a >= px[3] {
        *px = Rgba([color[0], color[1], color[2], a]);
    }
}

fn ring(img: &mut RgbaImage, c: f64, r: f64, width: f64, color: [u8; 3], alpha: f64) {
    for y in 0..img.height() {
        for x in 0..img.width() {
            let d = ((x as f64 + 0.5 - c).powi(2) + (y as f64 + 0.5 - c).powi(2)).sqrt();
            let cov = (width / 2.0 + 0.5 - (d - r).abs()).clamp(0.0, 1.0);
            paint(img, x as i64, y as i64, color, cov * alpha);
        }
    }
}

fn disc(img: &mut RgbaImage, c: f64, r: f64, color: [u8; 3]) {
    for y in 0..img.height() {
        for x in 0..img.width() {
            let d = ((x as f64 + 0.5 - c).powi(2) + (y as f64 + 0.5 - c).powi(2)).sqrt();
            paint(img, x as i64, y as i64, color, (r + 0.5 - d).clamp(0.0, 1.0));
        }
    }
}

fn text_centered(img: &mut RgbaImage, text: &str, size_px: f32, color: [u8; 3], alpha: f64) {
    let font = fonts().get(FontId::SansBold);
    let scaled = font.as_scaled(PxScale::from(size_px));
    let width: f32 = text.chars().map(|c| scaled.h_advance(scaled.glyph_id(c))).sum();
    let mut pen = (img.width() as f32 - width) / 2.0;
    let baseline = (img.height() as f32 + scaled.ascent() + scaled.descent()) / 2.0;
    for ch in text.chars() {
        let glyph = scaled.glyph_id(ch).with_scale_and_position(scaled.scale(), point(pen, baseline));
        pen += scaled.h_advance(scaled.glyph_id(ch));
        if let Some(outline) = font.outline_glyph(glyph) {
            let b = outline.px_bounds();
            outline.draw(|gx, gy, cov| {
                let (x, y) = (b.min.x as i64 + gx as i64, b.min.y as i64 + gy as i64);
                if x >= 0 && y >= 0 && x < img.width() as i64 && y < img.height() as i64 {
                    let px = img.get_pixel_mut(x as u32, y as u32);
                    let c = cov as f64 * alpha;
                    for k in 0..3 {
                        px[k] = (px[k] as f64 * (1.0 - c) + color[k] as f64 * c).round() as u8;
                    }
                    px[3] = px[3].max((c * 255.0).round() as u8);
                }
            });
        }
    }
}

fn palette(seed: u64) -> [u8; 3] {
    const COLORS: [[u8; 3]; 6] = [[20, 50, 120], [120, 20, 30], [20, 90, 50], [90, 40, 110], [150, 100, 20], [30, 30, 30]];
    COLORS[(seed % COLORS.len() as u64) as usize]
}

fn badge(initials: &str, seed: u64) -> RgbaImage {
    let mut img = RgbaImage::new(BADGE_PX, BADGE_PX);
    let c = BADGE_PX as f64 / 2.0;
    let color = palette(seed);
    disc(&mut img, c, c - 4.0, color);
    ring(&mut img, c, c - 16.0, 4.0, [235, 215, 150], 1.0);
    text_centered(&mut img, initials, BADGE_PX as f32 * 0.36, [250, 245, 230], 1.0);
    img
}

fn stamp(initials: &str, seed: u64) -> RgbaImage {
    let mut img = RgbaImage::new(STAMP_PX, STAMP_PX);
    let c = STAMP_PX as f64 / 2.0;
    let ink = [[40, 60, 150], [140, 30, 60], [70, 40, 120]][(seed % 3) as usize];
    ring(&mut img, c, c - 10.0, 9.0, ink, 0.8);
    ring(&mut img, c, c - 34.0, 4.0, ink, 0.8);
    text_centered(&mut img, initials, STAMP_PX as f32 * 0.3, ink, 0.8);
    // Uneven ink: knock out speckles.
    let mut r = rng(child_seed(seed, "stamp-ink", 0));
    for px in img.pixels_mut() {
        if px[3] > 0 && r.gen_bool(0.18) {
            px[3] = (px[3] as f64 * r.gen_range(0.2..0.7)) as u8;
        }
    }
    img
}

fn signature(seed: u64) -> RgbaImage {
    let (w, h) = SIGNATURE_PX;
    let mut img = RgbaImage::new(w, h);
    let mut r = rng(child_seed(seed, "signature", 0));
    let loops = r.gen_range(4.0..7.0);
    let amp = r.gen_range(0.25..0.38) * h as f64;
    let slant = r.gen_range(0.15..0.35);
    let phase = r.gen_range(0.0..std::f64::consts::TAU);
    let ink = [15, 25, 90];
    let steps = 4000;
    for k in 0..steps {
        let t = k as f64 / steps as f64;
        let a = t * loops * std::f64::consts::TAU + phase;
        let y = h as f64 / 2.0 + amp * a.sin() * (1.0 - 0.4 * t);
        let x = 20.0 + t * (w as f64 - 60.0) + 18.0 * a.cos() + slant * (h as f64 / 2.0 - y);
        let width = 2.2 + 1.2 * (a * 0.5).cos().abs();
        let (x0, y0) = (x.floor() as i64, y.floor() as i64);
        for dy in -4..=4 {
            for dx in -4..=4 {
                let d = ((x0 + dx) as f64 + 0.5 - x).hypot((y0 + dy) as f64 + 0.5 - y);
                paint(&mut img, x0 + dx, y0 + dy, ink, (width - d).clamp(0.0, 1.0) * 0.95);
            }
        }
    }
    img
}

/// Page-sized map: a Gaussian bump centred in `area`, zero outside it.
fn heatmap(w: u32, h: u32, area: &Area) -> GrayImage {
    let (x0, y0) = (mm_to_px(area.x_mm), mm_to_px(area.y_mm));
    let (aw, ah) = (mm_to_px(area.w_mm), mm_to_px(area.h_mm));
    let (cx, cy) = (x0 + aw / 2.0, y0 + ah / 2.0);
    let mut img = GrayImage::new(w, h);
    for y in (y0.max(0.0) as u32)..((y0 + ah).min(h as f64) as u32) {
        for x in (x0.max(0.0) as u32)..((x0 + aw).min(w as f64) as u32) {
            let dx = (x as f64 + 0.5 - cx) / (aw / 4.0);
            let dy = (y as f64 + 0.5 - cy) / (ah / 4.0);
            let v = 255.0 * (-(dx * dx + dy * dy) / 2.0).exp();
            img.put_pixel(x, y, Luma([v.round().max(1.0) as u8]));
        }
    }
    img
}
