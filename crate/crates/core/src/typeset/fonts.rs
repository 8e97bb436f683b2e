use std::sync::OnceLock;

use ab_glyph::{Font, FontRef, GlyphId, PxScale, ScaleFont};
use serde::{Deserialize, Serialize};

/// Rendering resolution of digital pages.
pub const DPI: f64 = 300.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FontId {
    #[default]
    Sans,
    SansBold,
    Serif,
}

static SANS: &[u8] = include_bytes!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets/fonts/DejaVuSans.ttf"));
static SANS_BOLD: &[u8] =
    include_bytes!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets/fonts/DejaVuSans-Bold.ttf"));
static SERIF: &[u8] = include_bytes!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets/fonts/DejaVuSerif.ttf"));

pub struct Fonts {
    sans: FontRef<'static>,
    sans_bold: FontRef<'static>,
    serif: FontRef<'static>,
}

/// The embedded font set.
pub fn fonts() -> &'static Fonts {
    static FONTS: OnceLock<Fonts> = OnceLock::new();
    FONTS.get_or_init(|| Fonts {
        sans: FontRef::try_from_slice(SANS).expect("embedded DejaVu Sans"),
        sans_bold: FontRef::try_from_slice(SANS_BOLD).expect("embedded DejaVu Sans Bold"),
        serif: FontRef::try_from_slice(SERIF).expect("embedded DejaVu Serif"),
    })
}

impl Fonts {
    pub fn get(&self, id: FontId) -> &FontRef<'static> {
        match id {
            FontId::Sans => &self.sans,
            FontId::SansBold => &self.sans_bold,
            FontId::Serif => &self.serif,
        }
    }
}

pub fn pt_to_px(pt: f64) -> f64 {
    pt * DPI / 72.0
}

pub fn mm_to_px(mm: f64) -> f64 {
    mm / 25.4 * DPI
}

/// Font metrics at one size, in pixels. Advances come straight from the
/// `hmtx` table; no kerning is applied.
#[derive(Clone, Copy)]
pub struct Metrics {
    pub font: FontId,
    /// Pixels per em.
    pub em: f64,
}

impl Metrics {
    pub fn new(font: FontId, size_pt: f64) -> Self {
        Metrics { font, em: pt_to_px(size_pt) }
    }

    fn face(&self) -> &'static FontRef<'static> {
        fonts().get(self.font)
    }

    fn units(&self) -> f64 {
        self.face().units_per_em().expect("scalable font") as f64
    }

    /// ab_glyph scale whose em square is `self.em` pixels.
    pub fn px_scale(&self) -> PxScale {
        let face = self.face();
        PxScale::from((self.em * face.height_unscaled() as f64 / self.units()) as f32)
    }

    pub fn glyph_id(&self, ch: char) -> GlyphId {
        self.face().glyph_id(ch)
    }

    pub fn advance(&self, ch: char) -> f64 {
        self.face().h_advance_unscaled(self.glyph_id(ch)) as f64 * self.em / self.units()
    }

    pub fn text_width(&self, text: &str) -> f64 {
        text.chars().map(|c| self.advance(c)).sum()
    }

    /// Distance from baseline up to the top of the line box.
    pub fn ascent(&self) -> f64 {
        self.face().ascent_unscaled() as f64 * self.em / self.units()
    }

    /// Distance from baseline down to the bottom of the line box (positive).
    pub fn descent(&self) -> f64 {
        -self.face().descent_unscaled() as f64 * self.em / self.units()
    }

    pub fn scaled(&self) -> ab_glyph::PxScaleFont<&'static FontRef<'static>> {
        self.face().as_scaled(self.px_scale())
    }

    /// Pixel bounds `(x0, y0, x1, y1)` of the ink `text` leaves when drawn
    /// with its pen starting at `(x, baseline)`; `None` for blank text.
    pub fn ink_bounds(&self, text: &str, x: f64, baseline: f64) -> Option<(f64, f64, f64, f64)> {
        let scaled = self.scaled();
        let mut pen = x;
        let mut out: Option<(f64, f64, f64, f64)> = None;
        for ch in text.chars() {
            let glyph = scaled
                .glyph_id(ch)
                .with_scale_and_position(scaled.scale(), ab_glyph::point(pen as f32, baseline as f32));
            if let Some(outline) = scaled.font().outline_glyph(glyph) {
                let b = outline.px_bounds();
                let r = (b.min.x as f64, b.min.y as f64, b.max.x as f64, b.max.y as f64);
                out = Some(match out {
                    None => r,
                    Some(o) => (o.0.min(r.0), o.1.min(r.1), o.2.max(r.2), o.3.max(r.3)),
                });
            }
            pen += self.advance(ch);
        }
        out
    }

    pub fn covers(&self, ch: char) -> bool {
        ch == ' ' || self.glyph_id(ch).0 != 0
    }
}
