//! Template instantiation and page typesetting.
//!
//! Pages are laid out directly from font metrics, so every word box is known
//! exactly before a single pixel is drawn. A word box spans the pen advance of
//! its glyphs and the font's ascent-to-descent line box, grown where a glyph
//! inks outside it (the hook of `J`, stacked accents). No kerning is applied,
//! so measured and drawn positions agree.

mod document;
pub mod fonts;
mod template;

use std::path::{Path, PathBuf};

use ab_glyph::{point, Font, ScaleFont};
use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use document::{instantiate, issue_date, DocumentModel, Rule, Tag, TextRun};
pub use fonts::{mm_to_px, pt_to_px, FontId, Metrics, DPI};
pub use template::{
    check_keyword, layout_model_tables, parse_slot_keyword, placeholders, Align, Anchor, Area,
    AssetAnchors, PageGeometry, TableDecl, TableStyle, TemplateSpec, TextBlock, KEYWORDS,
    MAX_SUBJECTS_PER_LEVEL, MIN_SUBJECTS_PER_LEVEL, TEMPLATE_FORMAT,
};

pub const PAGE_BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
pub const INK: Rgb<u8> = Rgb([20, 20, 28]);
pub const RULE_INK: Rgb<u8> = Rgb([110, 110, 120]);

#[derive(Debug, Error)]
pub enum TypesetError {
    #[error("template {path}: {message}")]
    Template { path: PathBuf, message: String },
    #[error("no value for keyword `{0}`")]
    MissingKeywordValue(String),
    #[error("template needs {slots} subjects for level {level} but the record has fewer")]
    SlotOverflow { slots: usize, level: u8 },
    #[error("`{text}` is {width:.0} px wide but only {max:.0} px fit")]
    TextOverflow { text: String, width: f64, max: f64 },
    #[error("no glyph for `{ch}` in `{text}`")]
    MissingGlyph { ch: char, text: String },
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("template {template}: tables end at {bottom_mm:.1} mm down / {right_mm:.1} mm across, outside the margins")]
    TableOutOfPage { template: String, bottom_mm: f64, right_mm: f64 },
}

impl TypesetError {
    pub(crate) fn template(path: &Path, message: impl Into<String>) -> Self {
        TypesetError::Template { path: path.to_path_buf(), message: message.into() }
    }
}

/// Integer pixel box `[x0, y0, x1, y1]`, half-open on the right and bottom.
pub type BoxPx = [i32; 4];

pub fn union(a: BoxPx, b: BoxPx) -> BoxPx {
    [a[0].min(b[0]), a[1].min(b[1]), a[2].max(b[2]), a[3].max(b[3])]
}

pub fn contains(outer: BoxPx, inner: BoxPx) -> bool {
    outer[0] <= inner[0] && outer[1] <= inner[1] && inner[2] <= outer[2] && inner[3] <= outer[3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub text: String,
    #[serde(rename = "box")]
    pub bbox: BoxPx,
}

/// One line of text sharing a label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: u32,
    pub text: String,
    pub tag: Tag,
    #[serde(rename = "box")]
    pub bbox: BoxPx,
    pub words: Vec<Word>,
    pub link: Option<u32>,
}

/// Glyph placement of one run, kept for rasterization.
#[derive(Clone, Debug, PartialEq)]
struct PlacedRun {
    text: String,
    font: FontId,
    size_pt: f64,
    x: f64,
    baseline: f64,
}

/// Positioned words and segments of one page, without pixels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageLayout {
    pub width: u32,
    pub height: u32,
    /// Segments in reading order: by top edge, then left edge.
    pub segments: Vec<Segment>,
    #[serde(skip)]
    placed: Vec<PlacedRun>,
    #[serde(skip)]
    rules: Vec<Rule>,
}

impl PageLayout {
    pub fn words(&self) -> impl Iterator<Item = (&Segment, &Word)> {
        self.segments.iter().flat_map(|s| s.words.iter().map(move |w| (s, w)))
    }

    pub fn word_count(&self) -> usize {
        self.segments.iter().map(|s| s.words.len()).sum()
    }
}

#[derive(Clone, Debug)]
pub struct TypesetPage {
    pub layout: PageLayout,
    pub raster: RgbImage,
}

/// Measures every run of `doc` and assigns word and segment boxes.
pub fn layout_page(doc: &DocumentModel) -> Result<PageLayout, TypesetError> {
    let mut segments = Vec::new();
    let mut placed = Vec::new();
    for run in &doc.runs {
        let words: Vec<&str> = run.text.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let m = Metrics::new(run.font, run.size_pt);
        let text = words.join(" ");
        for ch in text.chars() {
            if !m.covers(ch) {
                return Err(TypesetError::MissingGlyph { ch, text: run.text.clone() });
            }
        }
        let width = m.text_width(&text);
        if let Some(max) = run.max_width_px {
            if width > max {
                return Err(TypesetError::TextOverflow { text, width, max });
            }
        }
        let start = match run.align {
            Align::Left => run.x_px,
            Align::Center => run.x_px - width / 2.0,
            Align::Right => run.x_px - width,
        };
        if start < 0.0 || start + width > doc.width as f64 {
            return Err(TypesetError::TextOverflow { text, width, max: doc.width as f64 });
        }
        let top = (run.baseline_px - m.ascent()).floor() as i32;
        let bottom = (run.baseline_px + m.descent()).ceil() as i32;
        let space = m.advance(' ');
        let mut pen = start;
        let mut boxes = Vec::with_capacity(words.len());
        for word in &words {
            let w = m.text_width(word);
            let mut bbox = [pen.floor() as i32, top, (pen + w).ceil() as i32, bottom];
            if let Some((x0, y0, x1, y1)) = m.ink_bounds(word, pen, run.baseline_px) {
                bbox = union(bbox, [x0.floor() as i32, y0.floor() as i32, x1.ceil() as i32, y1.ceil() as i32]);
            }
            boxes.push(Word { text: word.to_string(), bbox });
            pen += w + space;
        }
        let bbox = boxes.iter().skip(1).fold(boxes[0].bbox, |acc, w| union(acc, w.bbox));
        if bbox[0] < 0 || bbox[1] < 0 || bbox[2] > doc.width as i32 || bbox[3] > doc.height as i32 {
            return Err(TypesetError::TextOverflow { text, width, max: doc.width as f64 });
        }
        segments.push(Segment { id: 0, text: text.clone(), tag: run.tag.clone(), bbox, words: boxes, link: run.link });
        placed.push(PlacedRun { text, font: run.font, size_pt: run.size_pt, x: start, baseline: run.baseline_px });
    }
    segments.sort_by_key(|s| (s.bbox[1], s.bbox[0]));
    for (i, s) in segments.iter_mut().enumerate() {
        s.id = i as u32;
    }
    Ok(PageLayout { width: doc.width, height: doc.height, segments, placed, rules: doc.rules.clone() })
}

/// Lays out and rasterizes `doc` on a white page.
pub fn typeset(doc: &DocumentModel) -> Result<TypesetPage, TypesetError> {
    let layout = layout_page(doc)?;
    let raster = render(&layout);
    Ok(TypesetPage { layout, raster })
}

pub fn render(layout: &PageLayout) -> RgbImage {
    let mut img = RgbImage::from_pixel(layout.width, layout.height, PAGE_BACKGROUND);
    for rule in &layout.rules {
        fill_rect(&mut img, rule, RULE_INK);
    }
    for run in &layout.placed {
        draw_text(&mut img, run);
    }
    img
}

fn fill_rect(img: &mut RgbImage, r: &Rule, color: Rgb<u8>) {
    let x0 = r.x0.round().max(0.0) as u32;
    let y0 = r.y0.round().max(0.0) as u32;
    let x1 = (r.x1.round() as u32).min(img.width());
    let y1 = (r.y1.round() as u32).min(img.height());
    for y in y0..y1 {
        for x in x0..x1 {
            img.put_pixel(x, y, color);
        }
    }
}

fn draw_text(img: &mut RgbImage, run: &PlacedRun) {
    let m = Metrics::new(run.font, run.size_pt);
    let scaled = m.scaled();
    let mut pen = run.x;
    for ch in run.text.chars() {
        let glyph = scaled
            .glyph_id(ch)
            .with_scale_and_position(scaled.scale(), point(pen as f32, run.baseline as f32));
        if let Some(outline) = scaled.font().outline_glyph(glyph) {
            let bounds = outline.px_bounds();
            outline.draw(|gx, gy, coverage| {
                let x = bounds.min.x as i32 + gx as i32;
                let y = bounds.min.y as i32 + gy as i32;
                if x < 0 || y < 0 || x >= img.width() as i32 || y >= img.height() as i32 {
                    return;
                }
                let c = coverage.clamp(0.0, 1.0);
                let dst = img.get_pixel_mut(x as u32, y as u32);
                for k in 0..3 {
                    let v = dst[k] as f32 * (1.0 - c) + INK[k] as f32 * c;
                    dst[k] = v.round() as u8;
                }
            });
        }
        pen += m.advance(ch);
    }
}

/// Loads the template bundled for `template_id` from `dir`.
pub fn load_template(dir: &Path, template_id: &str) -> Result<TemplateSpec, TypesetError> {
    TemplateSpec::load(&dir.join(format!("{template_id}.toml")))
}
