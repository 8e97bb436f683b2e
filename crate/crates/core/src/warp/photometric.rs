use image::{GrayImage, Rgb, RgbImage};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{BackgroundMaterial, RenderStyle, VisualPlan};
use crate::seed::{child_seed, rng};

/// Number of procedural paper textures.
pub const PAPER_TEXTURES: u8 = 13;
/// Largest per-channel change the paper texture may make to a sheet pixel.
pub const PAPER_MAX_DELTA: u8 = 24;

/// Everything the photometric stage applied to one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotometricTags {
    pub style: RenderStyle,
    pub material: BackgroundMaterial,
    pub objects: u32,
    pub shadow: bool,
    pub shadow_strength: Option<f64>,
    pub paper_texture: Option<u8>,
    pub gain: f64,
    pub tint: [f64; 3],
}

/// Illumination gain range and channel tint of each style.
pub fn style_light(style: RenderStyle) -> ((f64, f64), [f64; 3]) {
    match style {
        RenderStyle::Scanner => ((1.0, 1.06), [1.0, 1.0, 1.0]),
        RenderStyle::Natural => ((0.75, 0.95), [0.96, 1.0, 1.05]),
        RenderStyle::Studio => ((1.05, 1.2), [1.0, 1.0, 1.0]),
        RenderStyle::Warm => ((0.8, 1.0), [1.08, 1.0, 0.88]),
    }
}

/// Applies background, distractor objects, paper texture, shadow and
/// illumination according to `plan`. `mask` marks sheet pixels.
pub fn photometric_stage(img: &mut RgbImage, mask: &GrayImage, plan: &VisualPlan, seed: u64) -> PhotometricTags {
    let sub = |tag: &str| child_seed(seed, tag, 0);
    let paper_texture = if plan.style == RenderStyle::Scanner {
        None
    } else {
        let id = rng(sub("texture-id")).gen_range(0..PAPER_TEXTURES);
        apply_paper_texture(img, mask, id, sub("texture"));
        Some(id)
    };
    paint_background(img, mask, plan.material, sub("background"));
    let objects = if plan.objects { draw_objects(img, mask, sub("objects")) } else { 0 };
    let shadow_strength = plan.shadow.then(|| cast_shadow(img, sub("shadow")));
    let ((lo, hi), tint) = style_light(plan.style);
    let gain = rng(sub("light")).gen_range(lo..=hi);
    for px in img.pixels_mut() {
        for c in 0..3 {
            px[c] = (px[c] as f64 * gain * tint[c]).round().clamp(0.0, 255.0) as u8;
        }
    }
    PhotometricTags {
        style: plan.style,
        material: plan.material,
        objects,
        shadow: plan.shadow,
        shadow_strength,
        paper_texture,
        gain,
        tint,
    }
}

fn hash(x: i64, y: i64, seed: u64) -> f64 {
    let mut h = seed ^ (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (y as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    h ^= h >> 33;
    h = h.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    h ^= h >> 33;
    h = h.wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    h ^= h >> 33;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Smooth value noise in [0, 1) with lattice spacing `cell` pixels (x and y
/// may be stretched independently).
fn value_noise(x: f64, y: f64, cell: [f64; 2], seed: u64) -> f64 {
    let (gx, gy) = (x / cell[0], y / cell[1]);
    let (ix, iy) = (gx.floor() as i64, gy.floor() as i64);
    let (fx, fy) = (gx - ix as f64, gy - iy as f64);
    let s = |t: f64| t * t * (3.0 - 2.0 * t);
    let (sx, sy) = (s(fx), s(fy));
    let a = hash(ix, iy, seed);
    let b = hash(ix + 1, iy, seed);
    let c = hash(ix, iy + 1, seed);
    let d = hash(ix + 1, iy + 1, seed);
    (a * (1.0 - sx) + b * sx) * (1.0 - sy) + (c * (1.0 - sx) + d * sx) * sy
}

/// Grain and stains inside the sheet mask. The change to every channel is
/// clamped to `PAPER_MAX_DELTA`.
pub fn apply_paper_texture(img: &mut RgbImage, mask: &GrayImage, texture: u8, seed: u64) {
    let t = texture as f64;
    let grain_cell = 1.5 + (t % 4.0);
    let grain_amp = 3.0 + (t * 7.0) % 9.0;
    let fiber_amp = 2.0 + (t * 3.0) % 5.0;
    let tint = [(t * 5.0) % 7.0 - 2.0, (t * 3.0) % 5.0 - 2.0, -((t * 11.0) % 9.0)];
    let mut r = rng(seed);
    let stains: Vec<(f64, f64, f64, f64)> = (0..(texture % 3))
        .map(|_| {
            (
                r.gen_range(0.0..img.width() as f64),
                r.gen_range(0.0..img.height() as f64),
                r.gen_range(40.0..160.0),
                r.gen_range(8.0..20.0),
            )
        })
        .collect();
    let limit = PAPER_MAX_DELTA as f64;
    for (x, y, px) in img.enumerate_pixels_mut() {
        if mask.get_pixel(x, y)[0] == 0 {
            continue;
        }
        let (fx, fy) = (x as f64, y as f64);
        let grain = (hash(x as i64, y as i64, seed) - 0.5) * grain_amp
            + (value_noise(fx, fy, [grain_cell * 12.0, grain_cell], seed ^ 1) - 0.5) * fiber_amp;
        let mut stain = 0.0;
        for &(sx, sy, radius, depth) in &stains {
            let d = ((fx - sx).powi(2) + (fy - sy).powi(2)).sqrt() / radius;
            if d < 1.0 {
                stain += depth * (1.0 - d * d);
            }
        }
        for c in 0..3 {
            let stain_c = if c == 2 { stain * 1.6 } else { stain };
            let delta = (grain + tint[c] - stain_c).clamp(-limit, limit);
            px[c] = (px[c] as f64 + delta).round().clamp(0.0, 255.0) as u8;
        }
    }
}

fn paint_background(img: &mut RgbImage, mask: &GrayImage, material: BackgroundMaterial, seed: u64) {
    let mut r = rng(seed);
    let jitter = |r: &mut rand_chacha::ChaCha8Rng, base: [f64; 3], amount: f64| base.map(|c| c + r.gen_range(-amount..=amount));
    let pattern: Box<dyn Fn(f64, f64) -> [f64; 3]> = match material {
        BackgroundMaterial::Plastic => {
            let base = jitter(&mut r, [200.0, 198.0, 192.0], 12.0);
            Box::new(move |_, _| base)
        }
        BackgroundMaterial::Tiles => {
            let size = r.gen_range(160.0..320.0);
            let grout = r.gen_range(5.0..10.0);
            let base = jitter(&mut r, [214.0, 206.0, 190.0], 20.0);
            Box::new(move |x, y| {
                let (tx, ty) = ((x / size).floor(), (y / size).floor());
                let (lx, ly) = (x - tx * size, y - ty * size);
                if lx < grout || ly < grout {
                    return base.map(|c| c * 0.62);
                }
                let v = (hash(tx as i64, ty as i64, seed) - 0.5) * 18.0 + (value_noise(x, y, [40.0, 40.0], seed) - 0.5) * 8.0;
                base.map(|c| c + v)
            })
        }
        BackgroundMaterial::Wood => {
            let period = r.gen_range(18.0..40.0);
            let base = jitter(&mut r, [150.0, 102.0, 62.0], 18.0);
            Box::new(move |x, y| {
                let warp = value_noise(x, y, [400.0, 60.0], seed) * 40.0;
                let ring = ((y + warp) / period * std::f64::consts::TAU).sin();
                let v = ring * 14.0 + (value_noise(x, y, [120.0, 3.0], seed ^ 2) - 0.5) * 16.0;
                base.map(|c| c + v)
            })
        }
        BackgroundMaterial::Metal => {
            let base = jitter(&mut r, [168.0, 172.0, 178.0], 14.0);
            Box::new(move |x, y| {
                let brushed = (value_noise(x, y, [220.0, 1.5], seed) - 0.5) * 22.0;
                let sheen = (x / 1920.0 * std::f64::consts::PI).sin() * 12.0;
                base.map(|c| c + brushed + sheen)
            })
        }
    };
    for (x, y, px) in img.enumerate_pixels_mut() {
        if mask.get_pixel(x, y)[0] != 0 {
            continue;
        }
        let c = pattern(x as f64, y as f64);
        *px = Rgb(c.map(|v| v.round().clamp(0.0, 255.0) as u8));
    }
}

/// Pens, mugs and sticky notes on the desk, never on the sheet. Returns how
/// many were drawn.
fn draw_objects(img: &mut RgbImage, mask: &GrayImage, seed: u64) -> u32 {
    let mut r = rng(seed);
    let n = r.gen_range(1..=3);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let mut drawn = 0;
    for _ in 0..n {
        // Look for a desk pixel to anchor the object on.
        let mut center = None;
        for _ in 0..32 {
            let (cx, cy) = (r.gen_range(0.0..w), r.gen_range(0.0..h));
            if mask.get_pixel(cx as u32, cy as u32)[0] == 0 {
                center = Some((cx, cy));
                break;
            }
        }
        let Some((cx, cy)) = center else { continue };
        let angle: f64 = r.gen_range(0.0..std::f64::consts::PI);
        let (sin, cos) = angle.sin_cos();
        let kind = r.gen_range(0..3);
        let color = [r.gen_range(20.0..230.0), r.gen_range(20.0..230.0), r.gen_range(20.0..230.0)];
        // Signed distance-like test in the object's frame: negative inside.
        let (half_w, half_h, round) = match kind {
            0 => (r.gen_range(150.0..260.0), r.gen_range(9.0..15.0), 9.0),
            1 => (r.gen_range(90.0..140.0), 0.0, 0.0),
            _ => {
                let s = r.gen_range(75.0..110.0);
                (s, s, 4.0)
            }
        };
        let reach = half_w + half_h + 4.0;
        let (x0, x1) = ((cx - reach).max(0.0) as u32, ((cx + reach) as u32).min(img.width() - 1));
        let (y0, y1) = ((cy - reach).max(0.0) as u32, ((cy + reach) as u32).min(img.height() - 1));
        for y in y0..=y1 {
            for x in x0..=x1 {
                if mask.get_pixel(x, y)[0] != 0 {
                    continue;
                }
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                let (lx, ly) = (cos * dx + sin * dy, -sin * dx + cos * dy);
                let dist = match kind {
                    1 => (lx * lx + ly * ly).sqrt() - half_w,
                    _ => {
                        let qx = lx.abs() - (half_w - round);
                        let qy = ly.abs() - (half_h - round);
                        (qx.max(0.0).powi(2) + qy.max(0.0).powi(2)).sqrt() + qx.max(qy).min(0.0) - round
                    }
                };
                if dist < 0.0 {
                    // Darker rim, lighter middle.
                    let shade = if dist > -6.0 { 0.7 } else { 1.0 - 0.1 * (ly / (half_h.max(half_w))).abs() };
                    img.put_pixel(x, y, Rgb(color.map(|c| (c * shade).round().clamp(0.0, 255.0) as u8)));
                }
            }
        }
        drawn += 1;
    }
    drawn
}

/// Soft elliptical occluder multiplied over the whole frame. Returns its
/// peak darkening.
fn cast_shadow(img: &mut RgbImage, seed: u64) -> f64 {
    let mut r = rng(seed);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let (cx, cy) = (r.gen_range(0.0..w), r.gen_range(0.0..h));
    let (ra, rb) = (r.gen_range(400.0..1200.0), r.gen_range(300.0..900.0));
    let angle: f64 = r.gen_range(0.0..std::f64::consts::PI);
    let strength = r.gen_range(0.25..0.5);
    let (sin, cos) = angle.sin_cos();
    for (x, y, px) in img.enumerate_pixels_mut() {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let (lx, ly) = (cos * dx + sin * dy, -sin * dx + cos * dy);
        let d = ((lx / ra).powi(2) + (ly / rb).powi(2)).sqrt();
        // 1 inside the core, fading to 0 across the penumbra.
        let t = ((1.3 - d) / 0.6).clamp(0.0, 1.0);
        let cover = t * t * (3.0 - 2.0 * t);
        if cover <= 0.0 {
            continue;
        }
        let factor = 1.0 - strength * cover;
        for c in 0..3 {
            px[c] = (px[c] as f64 * factor).round() as u8;
        }
    }
    strength
}
