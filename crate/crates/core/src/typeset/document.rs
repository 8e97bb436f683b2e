use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fonts::{mm_to_px, FontId, Metrics};
use super::template::{placeholders, Align, TemplateSpec};
use super::TypesetError;
use crate::config::GradeScale;
use crate::demography::{remap_grade, AdminPair, StudentRecord};
use crate::seed::rng;

/// Semantic role of a text run.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "lowercase")]
pub enum Tag {
    Other,
    Question { theme: String, level: u8 },
    Answer { theme: String, level: u8 },
}

/// A resolved single-line run of text at a fixed position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextRun {
    pub text: String,
    pub tag: Tag,
    pub font: FontId,
    pub size_pt: f64,
    pub align: Align,
    /// Anchor x: left edge, center or right edge depending on `align`.
    pub x_px: f64,
    pub baseline_px: f64,
    /// Width of the cell the run must fit in, if any.
    pub max_width_px: Option<f64>,
    /// Runs sharing a key form one question with its answers.
    pub link: Option<u32>,
}

/// Filled rectangle in page pixels (table rules).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentModel {
    pub width: u32,
    pub height: u32,
    pub page: u32,
    pub levels: Vec<u8>,
    pub runs: Vec<TextRun>,
    pub rules: Vec<Rule>,
}

const RULE_PX: f64 = 3.0;
const CELL_PAD_MM: f64 = 2.0;

const MONTHS_EN: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];
const MONTHS_ES: [&str; 12] = [
    "enero", "febrero", "marzo", "abril", "mayo", "junio", "julio", "agosto", "septiembre",
    "octubre", "noviembre", "diciembre",
];

/// Issue date of a transcript: end of a school year between 2018 and 2023.
pub fn issue_date(language: &str, seed: u64) -> String {
    let mut r = rng(seed);
    let year = r.gen_range(2018..=2023);
    let month = r.gen_range(5..=6);
    let day = r.gen_range(1..=28);
    match language {
        "es" => format!("{day} de {} de {year}", MONTHS_ES[month]),
        _ => format!("{} {day}, {year}", MONTHS_EN[month]),
    }
}

/// Replaces every keyword of `template` for one page of `student` and lays
/// out the transcript table for the levels on that page.
pub fn instantiate(
    template: &TemplateSpec,
    student: &StudentRecord,
    admins: &AdminPair,
    page: u32,
    scale: GradeScale,
    seed: u64,
) -> Result<DocumentModel, TypesetError> {
    let slots = template.subjects_per_level;
    let mut values: BTreeMap<String, String> = BTreeMap::from([
        ("principal_name".into(), admins.principal.full_name.clone()),
        ("secretary_name".into(), admins.secretary.full_name.clone()),
        ("student_name".into(), student.person.full_name.clone()),
        ("date".into(), issue_date(template.language.as_str(), seed)),
        ("page_number".into(), page.to_string()),
    ]);
    for level in &student.levels {
        for (i, s) in level.subjects.iter().enumerate() {
            values.insert(format!("subject_{}_{}", i + 1, level.level_index), s.name.clone());
            values.insert(format!("grade_{}_{}", i + 1, level.level_index), remap_grade(s.grade, scale));
        }
    }

    let mut runs = Vec::new();
    for block in &template.text {
        let mut text = block.text.clone();
        for key in placeholders(&block.text)? {
            let value = values.get(&key).ok_or_else(|| TypesetError::MissingKeywordValue(key.clone()))?;
            text = text.replace(&format!("{{{{{key}}}}}"), value);
        }
        runs.push(TextRun {
            text,
            tag: Tag::Other,
            font: block.font,
            size_pt: block.size_pt,
            align: block.align,
            x_px: mm_to_px(block.x_mm),
            baseline_px: mm_to_px(block.y_mm),
            max_width_px: None,
            link: None,
        });
    }

    let levels = template.layout.levels_on_page(page);
    let mut rules = Vec::new();
    build_tables(template, student, &levels, slots, scale, &mut runs, &mut rules)?;

    Ok(DocumentModel {
        width: template.page.width_px(),
        height: template.page.height_px(),
        page,
        levels,
        runs,
        rules,
    })
}

fn build_tables(
    template: &TemplateSpec,
    student: &StudentRecord,
    levels: &[u8],
    slots: usize,
    scale: GradeScale,
    runs: &mut Vec<TextRun>,
    rules: &mut Vec<Rule>,
) -> Result<(), TypesetError> {
    let t = &template.table;
    let decl = template.decl();
    let rows = decl.rows(slots);
    let pitch = mm_to_px(t.row_pitch_mm);
    let pad = mm_to_px(CELL_PAD_MM);
    let x_left = mm_to_px(t.x_mm);
    let width = mm_to_px(t.width_mm);
    let pair_w = width / decl.column_pairs as f64;
    let subject_w = pair_w * t.subject_col_fraction;
    let grade_w = (pair_w - subject_w) / decl.grade_columns as f64;
    let body = Metrics::new(t.font, t.size_pt);
    let baseline_in_row = |m: &Metrics| (pitch - (m.ascent() + m.descent())) / 2.0 + m.ascent();

    let mut link = 0u32;
    for (table_index, table_levels) in levels.chunks(decl.levels_per_table).take(decl.tables).enumerate() {
        let top = mm_to_px(t.y_mm + table_index as f64 * (template.table_height_mm() + t.table_gap_mm));
        let caption = table_levels
            .iter()
            .map(|l| t.level_titles[*l as usize - 1].as_str())
            .collect::<Vec<_>>()
            .join(" / ");
        let static_run = |text: String, font: FontId, align: Align, x: f64, row: usize, max: f64| {
            let m = Metrics::new(font, t.size_pt);
            TextRun {
                text,
                tag: Tag::Other,
                font,
                size_pt: t.size_pt,
                align,
                x_px: x,
                baseline_px: top + row as f64 * pitch + baseline_in_row(&m),
                max_width_px: Some(max),
                link: None,
            }
        };
        runs.push(static_run(caption, t.header_font, Align::Left, x_left + pad, 0, width - 2.0 * pad));
        for pair in 0..decl.column_pairs {
            let px = x_left + pair as f64 * pair_w;
            runs.push(static_run(t.subject_header.clone(), t.header_font, Align::Left, px + pad, 1, subject_w - 2.0 * pad));
            for g in 0..decl.grade_columns {
                let gx = px + subject_w + g as f64 * grade_w;
                let text = if decl.grade_columns > 1 {
                    t.level_titles[table_levels[g.min(table_levels.len() - 1)] as usize - 1].clone()
                } else {
                    t.grade_header.clone()
                };
                runs.push(static_run(text, t.header_font, Align::Center, gx + grade_w / 2.0, 1, grade_w - 2.0 * pad));
            }
        }

        let question_level = table_levels[0];
        for slot in 0..slots {
            let pair = slot / rows;
            let row = 2 + slot % rows;
            let px = x_left + pair as f64 * pair_w;
            let baseline = top + row as f64 * pitch + baseline_in_row(&body);
            let level_record = |level: u8| {
                student
                    .level(level)
                    .and_then(|l| l.subjects.get(slot))
                    .ok_or(TypesetError::SlotOverflow { slots, level })
            };
            let subject = level_record(question_level)?;
            runs.push(TextRun {
                text: subject.name.clone(),
                tag: Tag::Question { theme: subject.theme.clone(), level: question_level },
                font: t.font,
                size_pt: t.size_pt,
                align: Align::Left,
                x_px: px + pad,
                baseline_px: baseline,
                max_width_px: Some(subject_w - 2.0 * pad),
                link: Some(link),
            });
            for (g, level) in table_levels.iter().enumerate().take(decl.grade_columns) {
                let graded = level_record(*level)?;
                let gx = px + subject_w + g as f64 * grade_w;
                runs.push(TextRun {
                    text: remap_grade(graded.grade, scale),
                    tag: Tag::Answer { theme: graded.theme.clone(), level: *level },
                    font: t.font,
                    size_pt: t.size_pt,
                    align: Align::Center,
                    x_px: gx + grade_w / 2.0,
                    baseline_px: baseline,
                    max_width_px: Some(grade_w - 2.0 * pad),
                    link: Some(link),
                });
            }
            link += 1;
        }

        if t.rules {
            let table_bottom = top + (2 + rows) as f64 * pitch;
            for row in 1..=(2 + rows) {
                let y = top + row as f64 * pitch;
                rules.push(Rule { x0: x_left, y0: y - RULE_PX / 2.0, x1: x_left + width, y1: y + RULE_PX / 2.0 });
            }
            let mut xs = vec![x_left, x_left + width];
            for pair in 0..decl.column_pairs {
                let px = x_left + pair as f64 * pair_w;
                xs.push(px);
                for g in 0..decl.grade_columns {
                    xs.push(px + subject_w + g as f64 * grade_w);
                }
            }
            xs.sort_by(f64::total_cmp);
            xs.dedup_by(|a, b| (*a - *b).abs() < 0.5);
            for x in xs {
                rules.push(Rule { x0: x - RULE_PX / 2.0, y0: top + pitch, x1: x + RULE_PX / 2.0, y1: table_bottom });
            }
        }
    }
    Ok(())
}
