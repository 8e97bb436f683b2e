//! Requirements file parsing and blueprint expansion.
//!
//! The requirements file is TOML whose first statement must be the versioned
//! header `format = "gradesynth-requirements/1"`. See `configs/` for complete
//! examples and the README for the field reference.

mod blueprint;
mod quota;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::demography::NameDatabase;

pub use blueprint::{build_blueprint, Blueprint, BlueprintEntry, BlueprintMeta, StageSeeds, VisualPlan};
pub use quota::largest_remainder;

pub const REQUIREMENTS_FORMAT: &str = "gradesynth-requirements/1";

const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed requirements: {0}")]
    MalformedConfig(String),
    #[error("probabilities in {map} sum to {sum}, expected 1")]
    InvalidProbability { map: String, sum: f64 },
    #[error("origin `{0}` is not in the name database")]
    UnknownOrigin(String),
    #[error("invalid requirements: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Name-origin code, e.g. `english` or `subsaharan`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Origin(pub String);

impl Origin {
    pub fn new(code: impl Into<String>) -> Self {
        Origin(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// ISO-639-1 style language code of a school, e.g. `en`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Language(pub String);

impl Language {
    pub fn new(code: impl Into<String>) -> Self {
        Language(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Transcript table structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayoutModel {
    /// One table per page, one subject and one grade column.
    #[serde(rename = "A_single")]
    ASingle,
    /// One table per page, two subject/grade column pairs.
    #[serde(rename = "A_double")]
    ADouble,
    /// Two stacked level tables per page.
    #[serde(rename = "B_two_tables")]
    BTwoTables,
    /// Three stacked level tables per page.
    #[serde(rename = "B_three_tables")]
    BThreeTables,
    /// One table, one subject column and grade columns for two levels.
    #[serde(rename = "C")]
    C,
}

impl LayoutModel {
    pub const ALL: [LayoutModel; 5] = [
        LayoutModel::ASingle,
        LayoutModel::ADouble,
        LayoutModel::BTwoTables,
        LayoutModel::BThreeTables,
        LayoutModel::C,
    ];

    /// Number of academic levels shown on one page.
    pub fn levels_per_page(&self) -> u32 {
        match self {
            LayoutModel::ASingle | LayoutModel::ADouble => 1,
            LayoutModel::BTwoTables | LayoutModel::C => 2,
            LayoutModel::BThreeTables => 3,
        }
    }

    /// Levels (1-based) printed on `page` (1-based).
    pub fn levels_on_page(&self, page: u32) -> Vec<u8> {
        let k = self.levels_per_page();
        (0..k)
            .map(|slot| ((page - 1) * k + slot + 1) as u8)
            .filter(|&l| l <= MAX_LEVEL)
            .collect()
    }

    pub fn max_pages(&self) -> u32 {
        (MAX_LEVEL as u32) / self.levels_per_page()
    }

    pub fn family(&self) -> char {
        match self {
            LayoutModel::ASingle | LayoutModel::ADouble => 'A',
            LayoutModel::BTwoTables | LayoutModel::BThreeTables => 'B',
            LayoutModel::C => 'C',
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            LayoutModel::ASingle => "A_single",
            LayoutModel::ADouble => "A_double",
            LayoutModel::BTwoTables => "B_two_tables",
            LayoutModel::BThreeTables => "B_three_tables",
            LayoutModel::C => "C",
        }
    }
}

impl fmt::Display for LayoutModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Highest academic level a transcript covers.
pub const MAX_LEVEL: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GradeScale {
    #[serde(rename = "numeric_0_10")]
    Numeric0To10,
    #[serde(rename = "numeric_0_100")]
    Numeric0To100,
    #[serde(rename = "letter_F_A")]
    LetterFToA,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderStyle {
    Scanner,
    Natural,
    Studio,
    Warm,
}

impl RenderStyle {
    pub const ALL: [RenderStyle; 4] =
        [RenderStyle::Scanner, RenderStyle::Natural, RenderStyle::Studio, RenderStyle::Warm];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackgroundMaterial {
    Tiles,
    Plastic,
    Wood,
    Metal,
}

impl BackgroundMaterial {
    pub const ALL: [BackgroundMaterial; 4] = [
        BackgroundMaterial::Tiles,
        BackgroundMaterial::Plastic,
        BackgroundMaterial::Wood,
        BackgroundMaterial::Metal,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchoolSpec {
    pub name: String,
    pub language: Language,
    #[serde(rename = "template")]
    pub template_id: String,
    #[serde(rename = "layout")]
    pub layout_model: LayoutModel,
    pub pages_per_student: u32,
    pub grade_scale: GradeScale,
}

impl SchoolSpec {
    /// Directory- and id-safe name, e.g. `Británico` -> `britanico`.
    pub fn slug(&self) -> String {
        slugify(&self.name)
    }
}

fn default_sigma() -> f64 {
    2.0
}

/// Grade-bias parameters on the 0-10 reference scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSpec {
    pub origin_grade_means: BTreeMap<Origin, f64>,
    pub gender_grade_means: BTreeMap<Gender, f64>,
    #[serde(default = "default_sigma")]
    pub grade_sigma: f64,
}

impl BiasSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (origin, mean) in &self.origin_grade_means {
            if !(0.0..=10.0).contains(mean) {
                return Err(ConfigError::Invalid(format!(
                    "grade mean {mean} for origin {origin} outside 0-10"
                )));
            }
        }
        for (gender, mean) in &self.gender_grade_means {
            if !(0.0..=10.0).contains(mean) {
                return Err(ConfigError::Invalid(format!(
                    "grade mean {mean} for gender {gender} outside 0-10"
                )));
            }
        }
        if !(self.grade_sigma > 0.0 && self.grade_sigma.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "grade_sigma must be positive, got {}",
                self.grade_sigma
            )));
        }
        Ok(())
    }

    /// Mean of the combined grade for a (origin, gender) group.
    pub fn combined_mean(&self, origin: &Origin, gender: Gender) -> Option<f64> {
        let o = self.origin_grade_means.get(origin)?;
        let g = self.gender_grade_means.get(&gender)?;
        Some((o + g) / 2.0)
    }
}

/// Target proportions of the photometric features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VisualMix {
    pub styles: BTreeMap<RenderStyle, f64>,
    pub cloth_fraction: f64,
    pub shadow_fraction: f64,
    pub objects_fraction: f64,
    /// Relative weights of the desk materials used when the style is not
    /// `scanner`; scanner samples always lie on the plain plastic lid.
    pub materials: BTreeMap<BackgroundMaterial, f64>,
}

impl Default for VisualMix {
    fn default() -> Self {
        VisualMix {
            styles: BTreeMap::from([
                (RenderStyle::Scanner, 0.3062),
                (RenderStyle::Natural, 0.2510),
                (RenderStyle::Studio, 0.2455),
                (RenderStyle::Warm, 0.1973),
            ]),
            cloth_fraction: 0.6173,
            shadow_fraction: 0.6572,
            objects_fraction: 0.3827,
            materials: BTreeMap::from([
                (BackgroundMaterial::Tiles, 0.3944),
                (BackgroundMaterial::Wood, 0.1993),
                (BackgroundMaterial::Metal, 0.1000),
            ]),
        }
    }
}

/// How student gender/origin are assigned within a school.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemographySampling {
    /// Exact largest-remainder counts, shuffled over the students.
    #[default]
    Quota,
    /// Independent categorical draw per student.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirements {
    pub format: String,
    pub master_seed: u64,
    #[serde(default)]
    pub created: Option<String>,
    pub languages: Vec<Language>,
    pub students_per_school: u32,
    #[serde(default)]
    pub demography_sampling: DemographySampling,
    pub gender_probabilities: BTreeMap<Gender, f64>,
    pub origin_probabilities: BTreeMap<Language, BTreeMap<Origin, f64>>,
    pub bias: BTreeMap<Language, BiasSpec>,
    #[serde(default)]
    pub visual: VisualMix,
    pub schools: Vec<SchoolSpec>,
}

impl Requirements {
    /// Parses and validates requirements text. `names` supplies the set of
    /// origins that have name pools.
    pub fn from_toml_str(text: &str, names: &NameDatabase) -> Result<Self, ConfigError> {
        check_header(text)?;
        let req: Requirements =
            toml::from_str(text).map_err(|e| ConfigError::MalformedConfig(e.to_string()))?;
        req.validate(names)?;
        Ok(req)
    }

    pub fn validate(&self, names: &NameDatabase) -> Result<(), ConfigError> {
        if self.format != REQUIREMENTS_FORMAT {
            return Err(ConfigError::MalformedConfig(format!(
                "unsupported format `{}`, expected `{REQUIREMENTS_FORMAT}`",
                self.format
            )));
        }
        if self.students_per_school < 1 {
            return Err(ConfigError::Invalid("students_per_school must be at least 1".into()));
        }
        if self.languages.is_empty() {
            return Err(ConfigError::Invalid("no languages requested".into()));
        }
        check_distribution("gender_probabilities", self.gender_probabilities.values())?;

        let known: BTreeSet<&Origin> = names.origins().collect();
        let mut slugs = BTreeSet::new();
        for school in &self.schools {
            if !self.languages.contains(&school.language) {
                return Err(ConfigError::Invalid(format!(
                    "school {} uses language {} which is not requested",
                    school.name, school.language
                )));
            }
            if school.pages_per_student < 1 {
                return Err(ConfigError::Invalid(format!(
                    "school {}: pages_per_student must be at least 1",
                    school.name
                )));
            }
            if school.pages_per_student > school.layout_model.max_pages() {
                return Err(ConfigError::Invalid(format!(
                    "school {}: layout {} fits at most {} pages of levels 1-{MAX_LEVEL}",
                    school.name,
                    school.layout_model,
                    school.layout_model.max_pages()
                )));
            }
            if !slugs.insert(school.slug()) {
                return Err(ConfigError::Invalid(format!("duplicate school {}", school.name)));
            }
        }

        for lang in &self.languages {
            if !self.schools.iter().any(|s| &s.language == lang) {
                return Err(ConfigError::Invalid(format!("no school for language {lang}")));
            }
            let origins = self.origin_probabilities.get(lang).ok_or_else(|| {
                ConfigError::Invalid(format!("missing origin_probabilities for {lang}"))
            })?;
            check_distribution(&format!("origin_probabilities.{lang}"), origins.values())?;
            for origin in origins.keys() {
                if !known.contains(origin) {
                    return Err(ConfigError::UnknownOrigin(origin.0.clone()));
                }
            }
            let bias = self
                .bias
                .get(lang)
                .ok_or_else(|| ConfigError::Invalid(format!("missing bias for {lang}")))?;
            bias.validate()?;
            for (origin, p) in origins {
                if *p > 0.0 && !bias.origin_grade_means.contains_key(origin) {
                    return Err(ConfigError::Invalid(format!(
                        "bias.{lang} has no grade mean for origin {origin}"
                    )));
                }
            }
            for (gender, p) in &self.gender_probabilities {
                if *p > 0.0 && !bias.gender_grade_means.contains_key(gender) {
                    return Err(ConfigError::Invalid(format!(
                        "bias.{lang} has no grade mean for gender {gender}"
                    )));
                }
            }
        }

        check_distribution("visual.styles", self.visual.styles.values())?;
        for (name, f) in [
            ("cloth_fraction", self.visual.cloth_fraction),
            ("shadow_fraction", self.visual.shadow_fraction),
            ("objects_fraction", self.visual.objects_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(ConfigError::Invalid(format!("visual.{name} must be in [0, 1]")));
            }
        }
        if self.visual.materials.contains_key(&BackgroundMaterial::Plastic) {
            return Err(ConfigError::Invalid(
                "visual.materials must not list plastic; it is reserved for scanner samples".into(),
            ));
        }
        let material_sum: f64 = self.visual.materials.values().sum();
        if self.visual.materials.values().any(|w| *w < 0.0) || material_sum <= 0.0 {
            return Err(ConfigError::Invalid("visual.materials needs positive weights".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form of these requirements.
    pub fn hash(&self) -> String {
        let canonical = crate::json::to_canonical_string(self).expect("requirements serialize");
        hex(&Sha256::digest(canonical.as_bytes()))
    }

    pub fn school(&self, name: &str) -> Option<&SchoolSpec> {
        self.schools.iter().find(|s| s.name == name || s.slug() == name)
    }
}

/// Reads and validates a requirements file.
pub fn parse_requirements(path: &Path, names: &NameDatabase) -> Result<Requirements, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Requirements::from_toml_str(&text, names)
}

fn check_header(text: &str) -> Result<(), ConfigError> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    let expected = format!("format = \"{REQUIREMENTS_FORMAT}\"");
    match first {
        Some(line) if line.replace(' ', "") == expected.replace(' ', "") => Ok(()),
        _ => Err(ConfigError::MalformedConfig(format!(
            "first statement must be the header `{expected}`"
        ))),
    }
}

fn check_distribution<'a>(
    name: &str,
    values: impl Iterator<Item = &'a f64>,
) -> Result<(), ConfigError> {
    let mut sum = 0.0;
    for v in values {
        if *v < 0.0 || !v.is_finite() {
            return Err(ConfigError::InvalidProbability { map: name.into(), sum: *v });
        }
        sum += v;
    }
    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(ConfigError::InvalidProbability { map: name.into(), sum });
    }
    Ok(())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Lowercase ASCII slug with Latin diacritics folded.
pub fn slugify(name: &str) -> String {
    let mut out = String::new();
    let mut dash = false;
    for ch in name.chars().flat_map(|c| c.to_lowercase()) {
        let folded = match ch {
            'á' | 'à' | 'ä' | 'â' | 'ã' => 'a',
            'é' | 'è' | 'ë' | 'ê' => 'e',
            'í' | 'ì' | 'ï' | 'î' => 'i',
            'ó' | 'ò' | 'ö' | 'ô' | 'õ' => 'o',
            'ú' | 'ù' | 'ü' | 'û' => 'u',
            'ñ' => 'n',
            'ç' => 'c',
            c => c,
        };
        if folded.is_ascii_alphanumeric() {
            out.push(folded);
            dash = false;
        } else if !dash && !out.is_empty() {
            out.push('-');
            dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

#[cfg(test)]
mod tests;
