use super::*;
use crate::annotate::{Entity, FunsdWord};
use crate::config::{BackgroundMaterial, RenderStyle};
use crate::seed::rng;
use image::{GrayImage, Luma, Rgb};
use proptest::prelude::*;
use rand::Rng;

const PAGE_W: u32 = 2480;
const PAGE_H: u32 = 3508;

fn plan(cloth: bool) -> VisualPlan {
    VisualPlan { style: RenderStyle::Natural, cloth, shadow: false, objects: false, material: BackgroundMaterial::Wood }
}

/// One entity per row of a regular grid of word boxes covering the page.
fn grid_doc(cols: i32, rows: i32) -> AnnotationDoc {
    let (cw, ch) = (PAGE_W as i32 / cols, PAGE_H as i32 / rows);
    let form = (0..rows)
        .map(|r| {
            let words: Vec<FunsdWord> = (0..cols)
                .map(|c| {
                    let (x, y) = (c * cw + cw / 4, r * ch + ch / 4);
                    FunsdWord { bbox: [x, y, x + cw / 2, y + ch / 3], text: format!("w{c}") }
                })
                .collect();
            let bbox = words.iter().skip(1).fold(words[0].bbox, |b, w| crate::typeset::union(b, w.bbox));
            let text = words.iter().map(|w| w.text.clone()).collect::<Vec<_>>().join(" ");
            Entity { bbox, id: r as u32, label: "other".into(), linking: vec![], text, words }
        })
        .collect();
    AnnotationDoc { form }
}

/// Direct linear transform from four correspondences with h33 = 1, solved
/// by Gaussian elimination with partial pivoting.
fn dlt(src: [[f64; 2]; 4], dst: [[f64; 2]; 4]) -> [[f64; 3]; 3] {
    let mut a = [[0.0; 9]; 8];
    for k in 0..4 {
        let ([x, y], [u, v]) = (src[k], dst[k]);
        a[2 * k] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * k + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    for col in 0..8 {
        let piv = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..8 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..9 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let h: Vec<f64> = (0..8).map(|i| a[i][8] / a[i][i]).collect();
    [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]]
}

fn apply(m: &[[f64; 3]; 3], p: [f64; 2]) -> [f64; 2] {
    let w = m[2][0] * p[0] + m[2][1] * p[1] + m[2][2];
    [(m[0][0] * p[0] + m[0][1] * p[1] + m[0][2]) / w, (m[1][0] * p[0] + m[1][1] * p[1] + m[1][2]) / w]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn center(b: [i32; 4]) -> [f64; 2] {
    [(b[0] + b[2]) as f64 / 2.0, (b[1] + b[3]) as f64 / 2.0]
}

#[test]
fn mean_pose_looks_at_the_sheet_center() {
    let pose = CameraPose::<f64>::mean();
    let c = pose.project([SHEET_WIDTH_M / 2.0, SHEET_HEIGHT_M / 2.0, 0.0]).unwrap();
    assert!(dist(c, [960.0, 1280.0]) < 1e-9, "{c:?}");
    let f = pose.focal_px();
    assert!((f - 50.0 / 36.0 * 1920.0).abs() < 1e-9);
    // The 180° roll together with the mirrored mesh shows the page upright:
    // page top-left lands top-left of the center.
    let mesh = PageMesh::<f64>::new(PAGE_W, PAGE_H, DEFAULT_PITCH_PX, SHEET_WIDTH_M, SHEET_HEIGHT_M);
    let tl = project_vertex(&mesh, &pose, 0, 0).unwrap();
    let br = project_vertex(&mesh, &pose, mesh.cols - 1, mesh.rows - 1).unwrap();
    assert!(tl[0] < 960.0 && tl[1] < 1280.0 && br[0] > 960.0 && br[1] > 1280.0, "{tl:?} {br:?}");
    // Sheet width 0.21 m at 0.55 m through a 50 mm lens.
    assert!(((br[0] - tl[0]) - f * SHEET_WIDTH_M / 0.55).abs() < 1e-6);
}

#[test]
fn pose_draws_match_their_distributions() {
    let n = 10_000;
    let poses: Vec<_> = (0..n).map(|i| sample_pose(crate::seed::child_seed(7, "pose-test", i))).collect();
    let stats = |f: &dyn Fn(&CameraPose<f64>) -> f64| {
        let xs: Vec<f64> = poses.iter().map(f).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        (mean, sd)
    };
    let checks: [(&str, Box<dyn Fn(&CameraPose<f64>) -> f64>, (f64, f64)); 4] = [
        ("z", Box::new(|p| p.location[2]), camera::Z_DIST_M),
        ("rx", Box::new(|p| p.rotation_deg[0]), camera::RX_DIST_DEG),
        ("ry", Box::new(|p| p.rotation_deg[1]), camera::RY_DIST_DEG),
        ("rz", Box::new(|p| p.rotation_deg[2]), camera::RZ_DIST_DEG),
    ];
    for (name, f, (mu, sd)) in checks {
        let (m, s) = stats(&*f);
        let se = sd / (n as f64).sqrt();
        assert!((m - mu).abs() < 4.0 * se, "{name} mean {m}");
        assert!((s - sd).abs() < 4.0 * sd / (2.0 * n as f64).sqrt(), "{name} sd {s}");
    }
    for p in &poses {
        assert_eq!([p.location[0], p.location[1]], [SHEET_WIDTH_M / 2.0, SHEET_HEIGHT_M / 2.0]);
        assert_eq!((p.width, p.height), (OUTPUT_WIDTH, OUTPUT_HEIGHT));
    }
}

#[test]
fn closed_form_homography_matches_a_dlt_fit() {
    let mesh = PageMesh::<f64>::new(PAGE_W, PAGE_H, DEFAULT_PITCH_PX, SHEET_WIDTH_M, SHEET_HEIGHT_M);
    let (c, r) = (mesh.cols - 1, mesh.rows - 1);
    let mut gen = rng(31);
    for seed in 0..50 {
        let pose = sample_pose(seed);
        let corners = [(0, 0), (c, 0), (c, r), (0, r)];
        let src = corners.map(|(i, j)| mesh.uv(i, j).map(f64::from));
        let dst = corners.map(|(i, j)| project_vertex(&mesh, &pose, i, j).unwrap());
        let fit = dlt(src, dst);
        let h = Homography::page_to_image(&pose, &mesh);
        for _ in 0..20 {
            let p = [gen.gen_range(0.0..PAGE_W as f64), gen.gen_range(0.0..PAGE_H as f64)];
            assert!(dist(h.apply(p), apply(&fit, p)) < 1e-6, "pose {seed}");
        }
        let inv = h.inverse().unwrap();
        let p = [123.0, 456.0];
        assert!(dist(inv.apply(h.apply(p)), p) < 1e-6);
        assert!(dist(h.then(&inv).apply(p), p) < 1e-6);
    }
}

#[test]
fn flat_sheet_vertices_follow_the_homography() {
    let mesh = PageMesh::<f64>::new(PAGE_W, PAGE_H, 64, SHEET_WIDTH_M, SHEET_HEIGHT_M);
    let pose = sample_pose(5);
    let h = Homography::page_to_image(&pose, &mesh);
    let proj = project(&mesh, &pose).unwrap();
    for j in 0..mesh.rows {
        for i in 0..mesh.cols {
            let uv = mesh.uv(i, j).map(f64::from);
            assert!(dist(proj.point(i, j), h.apply(uv)) < 1e-6);
        }
    }
}

#[test]
fn flat_remapped_boxes_agree_with_the_homography() {
    let doc = grid_doc(12, 40);
    let mesh = PageMesh::<f64>::new(PAGE_W, PAGE_H, DEFAULT_PITCH_PX, SHEET_WIDTH_M, SHEET_HEIGHT_M);
    let mut worst: f64 = 0.0;
    for seed in 0..40 {
        let out = warp_sample(WarpInput::Size(PAGE_W, PAGE_H), &doc, &plan(false), seed, 0).unwrap();
        let h = Homography::page_to_image(&out.metadata.pose, &mesh);
        for (src, dst) in doc.form.iter().zip(&out.doc.form) {
            for (a, b) in src.words.iter().zip(&dst.words) {
                let expected = h.apply(center(a.bbox));
                if in_frame_box(b.bbox) {
                    worst = worst.max(dist(center(b.bbox), expected));
                }
            }
        }
    }
    assert!(worst < 1.5, "{worst}");
}

fn in_frame_box(b: [i32; 4]) -> bool {
    b[0] > 0 && b[1] > 0 && b[2] < OUTPUT_WIDTH as i32 && b[3] < OUTPUT_HEIGHT as i32
}

#[test]
fn field_gradient_matches_finite_differences() {
    let field = sample_field(9, true);
    assert!(!field.flat_mode && (1..=field::MAX_WAVES).contains(&field.waves.len()));
    let h = 1e-6;
    for (x, y) in [(0.01, 0.02), (0.1, 0.15), (0.2, 0.29)] {
        let [gx, gy] = field.gradient(x, y);
        let fx = (field.z(x + h, y) - field.z(x - h, y)) / (2.0 * h);
        let fy = (field.z(x, y + h) - field.z(x, y - h)) / (2.0 * h);
        assert!((gx - fx).abs() < 1e-6 && (gy - fy).abs() < 1e-6);
        assert!(field.z(x, y).abs() <= field.max_abs_z());
    }
    let flat = sample_field(9, false);
    assert_eq!(flat, WarpField::flat());
    assert_eq!(flat.z(0.1, 0.1), 0.0);
    assert_eq!(flat.max_slope(0.21, 0.297, 0.005), 0.0);
}

#[test]
fn clipped_word_threshold_is_inclusive() {
    let remapped = |clipped, total| Remapped { doc: AnnotationDoc { form: vec![] }, clipped_words: clipped, total_words: total };
    let flat = WarpField::flat();
    assert!(filter_validity(&remapped(2, 100), &flat).valid);
    assert!(filter_validity(&remapped(0, 0), &flat).valid);
    let v = filter_validity(&remapped(3, 100), &flat);
    assert_eq!(v.reasons, [FilterReason::ClippedWords]);

    // A single steep wave: slope amplitude · 2π / wavelength.
    let steep = WarpField {
        flat_mode: false,
        waves: vec![field::Wave { amplitude: 0.01, u: 1.0 / 0.06, v: 0.0, phase: 0.0 }],
    };
    let v = filter_validity(&remapped(0, 10), &steep);
    assert_eq!(v.reasons, [FilterReason::ExcessiveFolds]);
    assert!((v.max_slope - 0.01 * std::f64::consts::TAU / 0.06).abs() < 0.02);
}

#[test]
fn off_frame_boxes_keep_a_sliver() {
    let doc = grid_doc(1, 1);
    let corners = snap_boxes_to_mesh(&doc, &PageMesh::<f64>::new(PAGE_W, PAGE_H, 2, SHEET_WIDTH_M, SHEET_HEIGHT_M));
    let out = remap_boxes(&doc, &corners, |_, _| Ok([-50.0, 10.0]), 100, 100).unwrap();
    let b = out.doc.form[0].words[0].bbox;
    assert_eq!(b, [0, 9, 1, 10]);
    assert_eq!((out.clipped_words, out.total_words), (1, 1));
}

#[test]
fn warp_is_deterministic_and_records_its_draws() {
    let doc = grid_doc(4, 10);
    let a = warp_sample(WarpInput::Size(PAGE_W, PAGE_H), &doc, &plan(true), 77, 1).unwrap();
    let b = warp_sample(WarpInput::Size(PAGE_W, PAGE_H), &doc, &plan(true), 77, 1).unwrap();
    assert_eq!(a.doc, b.doc);
    assert_eq!(a.metadata, b.metadata);
    assert!(a.image.is_none() && a.metadata.photometric.is_none());
    assert!(a.metadata.attempts >= 1 && a.metadata.attempts <= MAX_ATTEMPTS);
    assert_eq!(a.metadata.reprocessed(), a.metadata.attempts > 1);
    assert_eq!(attempt_seed(77, 0), 77);
    assert_ne!(attempt_seed(77, 1), attempt_seed(77, 2));
    // Boxes stay well-formed and segments cover their words.
    for e in &a.doc.form {
        for w in &e.words {
            assert!(w.bbox[0] < w.bbox[2] && w.bbox[1] < w.bbox[3]);
            assert!(crate::typeset::contains(e.bbox, w.bbox));
        }
    }
}

#[test]
fn rendered_sheet_lands_where_the_homography_says() {
    // Small page, so the rasterization stays quick.
    let (w, h) = (400, 566);
    let mut page = RgbImage::from_pixel(w, h, Rgb([255, 255, 255]));
    for y in 100..200 {
        for x in 100..200 {
            page.put_pixel(x, y, Rgb([0, 0, 0]));
        }
    }
    let mesh = PageMesh::<f64>::new(w, h, 2, SHEET_WIDTH_M, SHEET_HEIGHT_M);
    let pose = sample_pose(12);
    let proj = project(&mesh, &pose).unwrap();
    let out = render_warped(&page, &mesh, &proj, OUTPUT_WIDTH, OUTPUT_HEIGHT);
    assert_eq!(out.mip_level, 0);
    let hom = Homography::page_to_image(&pose, &mesh);
    let dark = hom.apply([150.0, 150.0]).map(|c| c as u32);
    let light = hom.apply([300.0, 400.0]).map(|c| c as u32);
    assert!(out.rgb.get_pixel(dark[0], dark[1])[0] < 10);
    assert!(out.rgb.get_pixel(light[0], light[1])[0] > 245);
    assert_eq!(out.mask.get_pixel(dark[0], dark[1]), &Luma([255]));
    assert_eq!(out.mask.get_pixel(0, 0), &Luma([0]));
    // Covered area equals the projected quad's area within a pixel-wide rim.
    let quad = [(0, 0), (mesh.cols - 1, 0), (mesh.cols - 1, mesh.rows - 1), (0, mesh.rows - 1)].map(|(i, j)| proj.point(i, j));
    let area = (0..4).map(|k| quad[k][0] * quad[(k + 1) % 4][1] - quad[(k + 1) % 4][0] * quad[k][1]).sum::<f64>().abs() / 2.0;
    let perimeter: f64 = (0..4).map(|k| dist(quad[k], quad[(k + 1) % 4])).sum();
    let covered = out.mask.pixels().filter(|p| p[0] == 255).count() as f64;
    assert!((covered - area).abs() < perimeter, "{covered} vs {area}");
}

#[test]
fn mip_levels_and_downsampling() {
    assert_eq!(render::mip_level_for_scale(1.5), 0);
    assert_eq!(render::mip_level_for_scale(0.45), 1);
    assert_eq!(render::mip_level_for_scale(0.2), 2);
    assert_eq!(render::mip_level_for_scale(0.01), 3);
    let img = RgbImage::from_fn(5, 3, |x, _| Rgb([(x * 50) as u8, 0, 0]));
    let half = render::downsample(&img, 1);
    assert_eq!(half.dimensions(), (3, 2));
    assert_eq!(half.get_pixel(0, 0)[0], 25);
    assert_eq!(half.get_pixel(2, 0)[0], 200);
}

#[test]
fn paper_texture_is_bounded_and_masked() {
    let mut mask = GrayImage::new(64, 64);
    for y in 0..64 {
        for x in 0..32 {
            mask.put_pixel(x, y, Luma([255]));
        }
    }
    for texture in 0..photometric::PAPER_TEXTURES {
        let base = RgbImage::from_pixel(64, 64, Rgb([128, 128, 128]));
        let mut img = base.clone();
        photometric::apply_paper_texture(&mut img, &mask, texture, 3);
        for (x, _, p) in img.enumerate_pixels() {
            for c in 0..3 {
                let d = (p[c] as i32 - 128).unsigned_abs();
                if x >= 32 {
                    assert_eq!(d, 0);
                } else {
                    assert!(d <= photometric::PAPER_MAX_DELTA as u32, "texture {texture}: {d}");
                }
            }
        }
    }
}

#[test]
fn photometric_stage_follows_the_plan() {
    let mask = GrayImage::from_pixel(32, 32, Luma([255]));
    for style in RenderStyle::ALL {
        let p = VisualPlan { style, ..plan(false) };
        let mut img = RgbImage::from_pixel(32, 32, Rgb([200, 200, 200]));
        let tags = photometric_stage(&mut img, &mask, &p, 4);
        let ((lo, hi), tint) = photometric::style_light(style);
        assert!((lo..=hi).contains(&tags.gain));
        assert_eq!(tags.tint, tint);
        assert_eq!(tags.paper_texture.is_none(), style == RenderStyle::Scanner);
        assert_eq!((tags.objects, tags.shadow, tags.shadow_strength), (0, false, None));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nearest_vertex_is_nearest(u in 0.0f64..2480.0, v in 0.0f64..3508.0, pitch in 1u32..9) {
        let mesh = PageMesh::<f64>::new(PAGE_W, PAGE_H, pitch, SHEET_WIDTH_M, SHEET_HEIGHT_M);
        let (i, j) = mesh.nearest(u, v);
        let [vu, vv] = mesh.uv(i, j).map(f64::from);
        let best_u = (0..mesh.cols).map(|k| (mesh.uv(k, 0)[0] as f64 - u).abs()).fold(f64::INFINITY, f64::min);
        let best_v = (0..mesh.rows).map(|k| (mesh.uv(0, k)[1] as f64 - v).abs()).fold(f64::INFINITY, f64::min);
        prop_assert!((vu - u).abs() <= best_u + 1e-9);
        prop_assert!((vv - v).abs() <= best_v + 1e-9);
    }

    #[test]
    fn homography_inverse_roundtrips(seed in any::<u64>(), u in 0.0f64..2480.0, v in 0.0f64..3508.0) {
        let mesh = PageMesh::<f64>::new(PAGE_W, PAGE_H, DEFAULT_PITCH_PX, SHEET_WIDTH_M, SHEET_HEIGHT_M);
        let h = Homography::page_to_image(&sample_pose(seed), &mesh);
        let back = h.inverse().unwrap().apply(h.apply([u, v]));
        prop_assert!(dist(back, [u, v]) < 1e-6);
    }

    #[test]
    fn fields_stay_within_their_amplitude(seed in any::<u64>()) {
        let f = sample_field(seed, true);
        let max = f.max_abs_z();
        prop_assert!(max <= field::MAX_WAVES as f64 * field::AMPLITUDE_RANGE_M.1 + 1e-12);
        for w in &f.waves {
            let lambda = 1.0 / (w.u * w.u + w.v * w.v).sqrt();
            prop_assert!((field::WAVELENGTH_RANGE_M.0 - 1e-12..=field::WAVELENGTH_RANGE_M.1 + 1e-12).contains(&lambda));
        }
    }
}
