//! FUNSD-style label files and evidence overlays.
//!
//! Labels read `{role}_{language}-{theme}_{level}`, e.g.
//! `answer_es-physical-education_3`, plus the catch-all `other`.

use std::collections::{BTreeMap, BTreeSet};

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Language, MAX_LEVEL};
use crate::demography::THEMES;
use crate::typeset::{contains, BoxPx, PageLayout, Tag};

/// Languages the bundled vocabulary covers.
pub const LABEL_LANGUAGES: [&str; 2] = ["en", "es"];
pub const OTHER: &str = "other";

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("answer segment {id} ({label}) has no question on the page")]
    OrphanAnswer { id: u32, label: String },
    #[error("label file does not parse: {0}")]
    Parse(String),
}

/// The closed label set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelVocabulary {
    labels: BTreeSet<String>,
}

impl LabelVocabulary {
    pub fn bundled() -> Self {
        LabelVocabulary::for_languages(&LABEL_LANGUAGES)
    }

    pub fn for_languages(languages: &[&str]) -> Self {
        let mut labels = BTreeSet::from([OTHER.to_string()]);
        for lang in languages {
            for theme in THEMES {
                for level in 1..=MAX_LEVEL {
                    for role in ["question", "answer"] {
                        labels.insert(label(role, lang, theme, level));
                    }
                }
            }
        }
        LabelVocabulary { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }
}

pub fn label(role: &str, language: &str, theme: &str, level: u8) -> String {
    format!("{role}_{language}-{theme}_{level}")
}

/// Parsed form of a non-`other` label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelParts<'a> {
    pub role: &'a str,
    /// `{language}-{theme}`.
    pub subject: &'a str,
    pub level: u8,
}

pub fn parse_label(label: &str) -> Option<LabelParts<'_>> {
    let (role, rest) = label.split_once('_')?;
    let (subject, level) = rest.rsplit_once('_')?;
    Some(LabelParts { role, subject, level: level.parse().ok()? })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunsdWord {
    #[serde(rename = "box")]
    pub bbox: BoxPx,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    #[serde(rename = "box")]
    pub bbox: BoxPx,
    pub id: u32,
    pub label: String,
    /// `[question_id, answer_id]` pairs this entity takes part in.
    pub linking: Vec<[u32; 2]>,
    pub text: String,
    pub words: Vec<FunsdWord>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationDoc {
    pub form: Vec<Entity>,
}

impl AnnotationDoc {
    pub fn to_json(&self) -> String {
        crate::json::to_canonical_string(self).expect("annotation serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AnnotateError> {
        serde_json::from_str(text).map_err(|e| AnnotateError::Parse(e.to_string()))
    }

    pub fn entity(&self, id: u32) -> Option<&Entity> {
        self.form.iter().find(|e| e.id == id)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.form.iter().map(|e| e.label.as_str())
    }

    pub fn word_count(&self) -> usize {
        self.form.iter().map(|e| e.words.len()).sum()
    }
}

fn tag_label(tag: &Tag, language: &str) -> String {
    match tag {
        Tag::Other => OTHER.to_string(),
        Tag::Question { theme, level } => label("question", language, theme, *level),
        Tag::Answer { theme, level } => label("answer", language, theme, *level),
    }
}

/// One entity per segment; questions and answers that share a table cell
/// group are linked.
pub fn annotate_page(layout: &PageLayout, language: &Language) -> Result<AnnotationDoc, AnnotateError> {
    let mut form: Vec<Entity> = layout
        .segments
        .iter()
        .map(|s| Entity {
            bbox: s.bbox,
            id: s.id,
            label: tag_label(&s.tag, language.as_str()),
            linking: Vec::new(),
            text: s.text.clone(),
            words: s.words.iter().map(|w| FunsdWord { bbox: w.bbox, text: w.text.clone() }).collect(),
        })
        .collect();

    let mut groups: BTreeMap<u32, (Vec<u32>, Vec<u32>)> = BTreeMap::new();
    for s in &layout.segments {
        let Some(key) = s.link else { continue };
        let group = groups.entry(key).or_default();
        match s.tag {
            Tag::Question { .. } => group.0.push(s.id),
            Tag::Answer { .. } => group.1.push(s.id),
            Tag::Other => {}
        }
    }
    let mut links: BTreeMap<u32, Vec<[u32; 2]>> = BTreeMap::new();
    for (questions, answers) in groups.values() {
        let Some(&q) = questions.first() else {
            let id = answers[0];
            let label = form.iter().find(|e| e.id == id).map(|e| e.label.clone()).unwrap_or_default();
            return Err(AnnotateError::OrphanAnswer { id, label });
        };
        for &a in answers {
            links.entry(q).or_default().push([q, a]);
            links.entry(a).or_default().push([q, a]);
        }
    }
    for entity in &mut form {
        if let Some(l) = links.remove(&entity.id) {
            entity.linking = l;
        }
    }
    Ok(AnnotationDoc { form })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Violation {
    UnknownLabel { id: u32, label: String },
    DuplicateId { id: u32 },
    DegenerateBox { id: u32, word: Option<usize> },
    WordOutsideSegment { id: u32, word: usize },
    TextMismatch { id: u32 },
    DanglingLink { id: u32, link: [u32; 2] },
    AsymmetricLink { id: u32, link: [u32; 2] },
    LinkRoleMismatch { link: [u32; 2] },
    LinkThemeMismatch { link: [u32; 2] },
    AnswerLinkCount { id: u32, count: usize },
    QuestionWithoutAnswer { id: u32 },
    RepeatedAnswerLevel { id: u32, level: u8 },
}

/// Checks box geometry, vocabulary membership and question/answer linking.
///
/// Linking rules: every answer links to exactly one question on the same
/// subject; every question links to exactly one answer of its own level, and
/// any further linked answers (a table that shows two levels side by side)
/// carry distinct levels.
pub fn validate_annotation(doc: &AnnotationDoc, vocab: &LabelVocabulary) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_id: BTreeMap<u32, &Entity> = BTreeMap::new();
    for e in &doc.form {
        if by_id.insert(e.id, e).is_some() {
            out.push(Violation::DuplicateId { id: e.id });
        }
    }
    let degenerate = |b: &BoxPx| b[0] < 0 || b[1] < 0 || b[0] >= b[2] || b[1] >= b[3];
    for e in &doc.form {
        if !vocab.contains(&e.label) {
            out.push(Violation::UnknownLabel { id: e.id, label: e.label.clone() });
        }
        if degenerate(&e.bbox) {
            out.push(Violation::DegenerateBox { id: e.id, word: None });
        }
        for (i, w) in e.words.iter().enumerate() {
            if degenerate(&w.bbox) {
                out.push(Violation::DegenerateBox { id: e.id, word: Some(i) });
            }
            if !contains(e.bbox, w.bbox) {
                out.push(Violation::WordOutsideSegment { id: e.id, word: i });
            }
        }
        let joined: Vec<&str> = e.words.iter().map(|w| w.text.as_str()).collect();
        if joined.join(" ") != e.text {
            out.push(Violation::TextMismatch { id: e.id });
        }
        for link in &e.linking {
            if !link.contains(&e.id) || link.iter().any(|id| !by_id.contains_key(id)) {
                out.push(Violation::DanglingLink { id: e.id, link: *link });
                continue;
            }
            let other = if link[0] == e.id { link[1] } else { link[0] };
            if !by_id[&other].linking.contains(link) {
                out.push(Violation::AsymmetricLink { id: e.id, link: *link });
            }
        }
    }

    let mut links: BTreeSet<[u32; 2]> = BTreeSet::new();
    for e in &doc.form {
        for link in &e.linking {
            if link.iter().all(|id| by_id.contains_key(id)) {
                links.insert(*link);
            }
        }
    }
    let mut answers_of: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut questions_of: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for link in &links {
        let (q, a) = (by_id[&link[0]], by_id[&link[1]]);
        match (parse_label(&q.label), parse_label(&a.label)) {
            (Some(qp), Some(ap)) if qp.role == "question" && ap.role == "answer" => {
                if qp.subject != ap.subject {
                    out.push(Violation::LinkThemeMismatch { link: *link });
                }
                answers_of.entry(q.id).or_default().push(a.id);
                questions_of.entry(a.id).or_default().push(q.id);
            }
            _ => out.push(Violation::LinkRoleMismatch { link: *link }),
        }
    }
    for e in &doc.form {
        let Some(parts) = parse_label(&e.label) else { continue };
        match parts.role {
            "answer" => {
                let count = questions_of.get(&e.id).map_or(0, Vec::len);
                if count != 1 {
                    out.push(Violation::AnswerLinkCount { id: e.id, count });
                }
            }
            "question" => {
                let answers = answers_of.get(&e.id).map(Vec::as_slice).unwrap_or(&[]);
                let mut levels = BTreeSet::new();
                for a in answers {
                    if let Some(ap) = parse_label(&by_id[a].label) {
                        if !levels.insert(ap.level) {
                            out.push(Violation::RepeatedAnswerLevel { id: e.id, level: ap.level });
                        }
                    }
                }
                if !levels.contains(&parts.level) {
                    out.push(Violation::QuestionWithoutAnswer { id: e.id });
                }
            }
            _ => {}
        }
    }
    out
}

pub const EVIDENCE_STROKE: u32 = 2;

/// Outline color for a label: questions blue, answers green on odd levels and
/// orange on even levels, everything else gray.
pub fn evidence_color(label: &str) -> Rgb<u8> {
    match parse_label(label) {
        Some(p) if p.role == "question" => Rgb([30, 90, 220]),
        Some(p) if p.role == "answer" && p.level % 2 == 1 => Rgb([20, 160, 60]),
        Some(p) if p.role == "answer" => Rgb([235, 130, 20]),
        _ => Rgb([150, 150, 150]),
    }
}

/// Copy of `raster` with every word box outlined in its label color.
pub fn render_evidence(raster: &RgbImage, doc: &AnnotationDoc) -> RgbImage {
    let mut img = raster.clone();
    for e in &doc.form {
        let color = evidence_color(&e.label);
        for w in &e.words {
            outline(&mut img, w.bbox, color);
        }
    }
    img
}

/// Draws a `EVIDENCE_STROKE`-wide frame just inside `b`.
pub fn outline(img: &mut RgbImage, b: BoxPx, color: Rgb<u8>) {
    let (w, h) = (img.width() as i32, img.height() as i32);
    let x0 = b[0].clamp(0, w);
    let y0 = b[1].clamp(0, h);
    let x1 = b[2].clamp(0, w);
    let y1 = b[3].clamp(0, h);
    let s = EVIDENCE_STROKE as i32;
    for y in y0..y1 {
        for x in x0..x1 {
            let edge = x < x0 + s || x >= x1 - s || y < y0 + s || y >= y1 - s;
            if edge {
                img.put_pixel(x as u32, y as u32, color);
            }
        }
    }
}
