use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fonts::{mm_to_px, FontId, Metrics};
use super::TypesetError;
use crate::config::{Language, LayoutModel, MAX_LEVEL};

pub const TEMPLATE_FORMAT: &str = "gradesynth-template/1";

/// Keywords a template may reference as `{{keyword}}`. `subject_i_j` and
/// `grade_i_j` name slot `i` of level `j`.
pub const KEYWORDS: [&str; 5] = ["principal_name", "secretary_name", "student_name", "date", "page_number"];

pub const MIN_SUBJECTS_PER_LEVEL: usize = 6;
pub const MAX_SUBJECTS_PER_LEVEL: usize = 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Align {
    #[default]
    Left,
    Center,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageGeometry {
    pub width_mm: f64,
    pub height_mm: f64,
    pub margin_mm: f64,
}

impl PageGeometry {
    pub fn width_px(&self) -> u32 {
        mm_to_px(self.width_mm).round() as u32
    }

    pub fn height_px(&self) -> u32 {
        mm_to_px(self.height_mm).round() as u32
    }
}

/// A static line of text; may contain `{{keyword}}` placeholders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextBlock {
    pub x_mm: f64,
    /// Baseline position.
    pub y_mm: f64,
    pub size_pt: f64,
    #[serde(default)]
    pub font: FontId,
    #[serde(default)]
    pub align: Align,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableStyle {
    pub x_mm: f64,
    /// Top edge of the first table.
    pub y_mm: f64,
    pub width_mm: f64,
    pub row_pitch_mm: f64,
    pub size_pt: f64,
    #[serde(default)]
    pub font: FontId,
    #[serde(default = "default_header_font")]
    pub header_font: FontId,
    pub subject_header: String,
    pub grade_header: String,
    /// Caption of each level, e.g. "Grade 9".
    pub level_titles: [String; MAX_LEVEL as usize],
    /// Vertical space between stacked tables.
    #[serde(default = "default_gap")]
    pub table_gap_mm: f64,
    /// Share of a subject/grade column pair taken by the subject column.
    #[serde(default = "default_subject_fraction")]
    pub subject_col_fraction: f64,
    #[serde(default = "default_true")]
    pub rules: bool,
}

fn default_header_font() -> FontId {
    FontId::SansBold
}
fn default_gap() -> f64 {
    8.0
}
fn default_subject_fraction() -> f64 {
    0.7
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anchor {
    pub x_mm: f64,
    pub y_mm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub x_mm: f64,
    pub y_mm: f64,
    pub w_mm: f64,
    pub h_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetAnchors {
    /// Top-left corner of the badge.
    pub badge: Anchor,
    /// Regions the bundled stamp and signature heatmaps favour.
    pub stamp_area: Area,
    pub signature_area: Area,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSpec {
    pub format: String,
    pub id: String,
    pub school: String,
    pub language: Language,
    pub layout: LayoutModel,
    pub subjects_per_level: usize,
    pub page: PageGeometry,
    #[serde(default)]
    pub text: Vec<TextBlock>,
    pub table: TableStyle,
    pub assets: AssetAnchors,
}

/// Table structure implied by a layout model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableDecl {
    /// Stacked tables per page.
    pub tables: usize,
    /// Subject/grade column pairs side by side in each table.
    pub column_pairs: usize,
    /// Grade columns per subject column.
    pub grade_columns: usize,
    /// Levels shown by one table.
    pub levels_per_table: usize,
}

pub fn layout_model_tables(model: LayoutModel) -> TableDecl {
    match model {
        LayoutModel::ASingle => TableDecl { tables: 1, column_pairs: 1, grade_columns: 1, levels_per_table: 1 },
        LayoutModel::ADouble => TableDecl { tables: 1, column_pairs: 2, grade_columns: 1, levels_per_table: 1 },
        LayoutModel::BTwoTables => TableDecl { tables: 2, column_pairs: 1, grade_columns: 1, levels_per_table: 1 },
        LayoutModel::BThreeTables => TableDecl { tables: 3, column_pairs: 1, grade_columns: 1, levels_per_table: 1 },
        LayoutModel::C => TableDecl { tables: 1, column_pairs: 1, grade_columns: 2, levels_per_table: 2 },
    }
}

impl TableDecl {
    /// Data rows per table for `slots` subjects per level.
    pub fn rows(&self, slots: usize) -> usize {
        slots.div_ceil(self.column_pairs)
    }
}

impl TemplateSpec {
    pub fn load(path: &Path) -> Result<Self, TypesetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TypesetError::template(path, e.to_string()))?;
        let spec: TemplateSpec =
            toml::from_str(&text).map_err(|e| TypesetError::template(path, e.to_string()))?;
        spec.validate().map_err(|e| match e {
            TypesetError::Template { .. } => e,
            other => TypesetError::template(path, other.to_string()),
        })?;
        Ok(spec)
    }

    pub fn decl(&self) -> TableDecl {
        layout_model_tables(self.layout)
    }

    pub fn validate(&self) -> Result<(), TypesetError> {
        let invalid = |m: String| TypesetError::template(Path::new(&self.id), m);
        if self.format != TEMPLATE_FORMAT {
            return Err(invalid(format!("unsupported format `{}`", self.format)));
        }
        if !(MIN_SUBJECTS_PER_LEVEL..=MAX_SUBJECTS_PER_LEVEL).contains(&self.subjects_per_level) {
            return Err(invalid(format!(
                "subjects_per_level must be {MIN_SUBJECTS_PER_LEVEL}-{MAX_SUBJECTS_PER_LEVEL}"
            )));
        }
        for block in &self.text {
            for key in placeholders(&block.text)? {
                check_keyword(&key, self.subjects_per_level)?;
            }
        }
        let g = &self.page;
        let t = &self.table;
        let right = t.x_mm + t.width_mm;
        let bottom = self.table_bottom_mm();
        if t.x_mm < g.margin_mm || right > g.width_mm - g.margin_mm || t.y_mm < g.margin_mm || bottom > g.height_mm - g.margin_mm {
            return Err(TypesetError::TableOutOfPage {
                template: self.id.clone(),
                bottom_mm: bottom,
                right_mm: right,
            });
        }
        if !(0.2..=0.9).contains(&t.subject_col_fraction) {
            return Err(invalid("subject_col_fraction must be within 0.2-0.9".into()));
        }
        let metrics = Metrics::new(t.font, t.size_pt);
        if metrics.ascent() + metrics.descent() > mm_to_px(t.row_pitch_mm) {
            return Err(invalid("row_pitch_mm is smaller than the table font line height".into()));
        }
        Ok(())
    }

    /// Rows a single table occupies: caption, header, data rows.
    pub fn table_rows(&self) -> usize {
        2 + self.decl().rows(self.subjects_per_level)
    }

    pub fn table_height_mm(&self) -> f64 {
        self.table_rows() as f64 * self.table.row_pitch_mm
    }

    pub fn table_bottom_mm(&self) -> f64 {
        let n = self.decl().tables as f64;
        self.table.y_mm + n * self.table_height_mm() + (n - 1.0) * self.table.table_gap_mm
    }
}

/// Keywords referenced as `{{...}}` in `text`, in order of appearance.
pub fn placeholders(text: &str) -> Result<Vec<String>, TypesetError> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("{{") {
        let after = &rest[start + 2..];
        let end = after
            .find("}}")
            .ok_or_else(|| TypesetError::UnknownKeyword(format!("unterminated placeholder in `{text}`")))?;
        out.push(after[..end].trim().to_string());
        rest = &after[end + 2..];
    }
    Ok(out)
}

/// Accepts the fixed keywords plus `subject_i_j` / `grade_i_j` with
/// 1 ≤ i ≤ `slots` and 1 ≤ j ≤ 4.
pub fn check_keyword(key: &str, slots: usize) -> Result<(), TypesetError> {
    if KEYWORDS.contains(&key) || parse_slot_keyword(key).is_some_and(|(_, i, j)| i >= 1 && i <= slots && (1..=MAX_LEVEL).contains(&j)) {
        Ok(())
    } else {
        Err(TypesetError::UnknownKeyword(key.to_string()))
    }
}

/// Splits `subject_3_2` into ("subject", 3, 2).
pub fn parse_slot_keyword(key: &str) -> Option<(&str, usize, u8)> {
    let (kind, rest) = key.split_once('_')?;
    if kind != "subject" && kind != "grade" {
        return None;
    }
    let (i, j) = rest.split_once('_')?;
    Some((kind, i.parse().ok()?, j.parse().ok()?))
}
