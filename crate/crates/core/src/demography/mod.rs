//! Staff and student spawning: names by origin and gender, subject draws by
//! theme and synonym, and bias-parameterized grades.

mod names;
mod subjects;

use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{
    BiasSpec, Gender, GradeScale, Language, LayoutModel, Origin, Requirements, SchoolSpec,
    MAX_LEVEL,
};
use crate::seed::rng;

pub use names::{NameDatabase, NamePool, NAMES_FORMAT};
pub use subjects::{SubjectDatabase, SUBJECTS_FORMAT, THEMES};

#[derive(Debug, Error)]
pub enum DemographyError {
    #[error("no {gender} names for origin {origin}")]
    EmptyNamePool { origin: String, gender: Gender },
    #[error("{slots} subject slots requested but only {available} themes exist")]
    TooManySlots { slots: usize, available: usize },
    #[error("origin `{0}` has no grade mean or name pool")]
    UnknownOrigin(String),
    #[error("gender `{0}` has no grade mean")]
    UnknownGender(Gender),
    #[error("no subject database for language `{0}`")]
    UnknownLanguage(String),
    #[error("{path}: {message}")]
    Database { path: PathBuf, message: String },
}

impl DemographyError {
    fn database(path: &Path, message: impl Into<String>) -> Self {
        DemographyError::Database { path: path.to_path_buf(), message: message.into() }
    }
}

fn read(path: &Path) -> Result<String, DemographyError> {
    std::fs::read_to_string(path).map_err(|e| DemographyError::database(path, e.to_string()))
}

fn toml_files(dir: &Path) -> Result<Vec<PathBuf>, DemographyError> {
    let entries = std::fs::read_dir(dir).map_err(|e| DemographyError::database(dir, e.to_string()))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| DemographyError::database(dir, e.to_string()))?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Student,
    Principal,
    Secretary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub full_name: String,
    pub gender: Gender,
    pub origin: Origin,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdminPair {
    pub principal: Person,
    pub secretary: Person,
}

/// Draws a full name for (origin, gender): uniform given name, uniform family name.
pub fn draw_name(
    names: &NameDatabase,
    origin: &Origin,
    gender: Gender,
    r: &mut impl Rng,
) -> Result<String, DemographyError> {
    let pool = names
        .pool(origin)
        .ok_or_else(|| DemographyError::UnknownOrigin(origin.0.clone()))?;
    let empty = || DemographyError::EmptyNamePool { origin: origin.0.clone(), gender };
    let given = pool.given(gender);
    if given.is_empty() || pool.family.is_empty() {
        return Err(empty());
    }
    let first = &given[r.gen_range(0..given.len())];
    let last = &pool.family[r.gen_range(0..pool.family.len())];
    Ok(format!("{first} {last}"))
}

/// Origin used for a school's staff: the most likely origin configured for
/// the school's language (ties go to the alphabetically first code).
pub fn staff_origin(req: &Requirements, language: &Language) -> Option<Origin> {
    let probs = req.origin_probabilities.get(language)?;
    probs
        .iter()
        .fold(None::<(&Origin, f64)>, |best, (o, p)| match best {
            Some((_, bp)) if bp >= *p => best,
            _ => Some((o, *p)),
        })
        .map(|(o, _)| o.clone())
}

/// Principal and secretary of a school. Depends only on the seed, so every
/// student of the school sees the same pair.
pub fn spawn_admin(
    names: &NameDatabase,
    origin: &Origin,
    seed: u64,
) -> Result<AdminPair, DemographyError> {
    let mut r = rng(seed);
    let mut person = |role| -> Result<Person, DemographyError> {
        let gender = if r.gen_bool(0.5) { Gender::Female } else { Gender::Male };
        Ok(Person { full_name: draw_name(names, origin, gender, &mut r)?, gender, origin: origin.clone(), role })
    };
    let principal = person(Role::Principal)?;
    let secretary = person(Role::Secretary)?;
    Ok(AdminPair { principal, secretary })
}

/// Student with independently drawn gender and origin, then a name from the
/// matching pool.
pub fn spawn_student(
    req: &Requirements,
    names: &NameDatabase,
    school: &SchoolSpec,
    seed: u64,
) -> Result<Person, DemographyError> {
    let origins = req
        .origin_probabilities
        .get(&school.language)
        .ok_or_else(|| DemographyError::UnknownLanguage(school.language.0.clone()))?;
    let mut r = rng(seed);
    let gender = categorical(&mut r, req.gender_probabilities.iter().map(|(g, p)| (*g, *p)));
    let origin = categorical(&mut r, origins.iter().map(|(o, p)| (o.clone(), *p)));
    let full_name = draw_name(names, &origin, gender, &mut r)?;
    Ok(Person { full_name, gender, origin, role: Role::Student })
}

/// Student whose gender and origin were fixed by the blueprint.
pub fn name_student(
    names: &NameDatabase,
    gender: Gender,
    origin: &Origin,
    seed: u64,
) -> Result<Person, DemographyError> {
    let full_name = draw_name(names, origin, gender, &mut rng(seed))?;
    Ok(Person { full_name, gender, origin: origin.clone(), role: Role::Student })
}

fn categorical<T: Clone>(r: &mut impl Rng, items: impl Iterator<Item = (T, f64)> + Clone) -> T {
    let total: f64 = items.clone().map(|(_, p)| p).sum();
    let mut u = r.gen::<f64>() * total;
    let mut last = None;
    for (item, p) in items.filter(|(_, p)| *p > 0.0) {
        if u < p {
            return item;
        }
        u -= p;
        last = Some(item);
    }
    last.expect("distribution has positive mass")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subject {
    pub theme: String,
    pub name: String,
}

/// `slots` distinct themes drawn uniformly without replacement, each with a
/// uniformly chosen synonym.
pub fn sample_subjects(
    db: &SubjectDatabase,
    language: &Language,
    slots: usize,
    r: &mut impl Rng,
) -> Result<Vec<Subject>, DemographyError> {
    if !db.has_language(language) {
        return Err(DemographyError::UnknownLanguage(language.0.clone()));
    }
    if slots > THEMES.len() {
        return Err(DemographyError::TooManySlots { slots, available: THEMES.len() });
    }
    index::sample(r, THEMES.len(), slots)
        .into_iter()
        .map(|i| {
            let theme = THEMES[i];
            let synonyms = db.synonyms(language, theme).expect("validated theme set");
            let name = synonyms[r.gen_range(0..synonyms.len())].clone();
            Ok(Subject { theme: theme.to_string(), name })
        })
        .collect()
}

/// Reference-scale grade: the mean of one draw around the origin mean and one
/// around the gender mean, clamped to [0, 10].
pub fn sample_grade(
    bias: &BiasSpec,
    origin: &Origin,
    gender: Gender,
    r: &mut impl Rng,
) -> Result<f64, DemographyError> {
    Ok(sample_grade_unclamped(bias, origin, gender, r)?.clamp(0.0, 10.0))
}

pub fn sample_grade_unclamped(
    bias: &BiasSpec,
    origin: &Origin,
    gender: Gender,
    r: &mut impl Rng,
) -> Result<f64, DemographyError> {
    let mu_o = *bias
        .origin_grade_means
        .get(origin)
        .ok_or_else(|| DemographyError::UnknownOrigin(origin.0.clone()))?;
    let mu_g = *bias.gender_grade_means.get(&gender).ok_or(DemographyError::UnknownGender(gender))?;
    let sigma = bias.grade_sigma.max(0.0);
    let a = Normal::new(mu_o, sigma).expect("finite sigma").sample(r);
    let b = Normal::new(mu_g, sigma).expect("finite sigma").sample(r);
    Ok((a + b) / 2.0)
}

/// Renders a reference-scale grade in a school's grading scale.
pub fn remap_grade(grade: f64, scale: GradeScale) -> String {
    let grade = grade.clamp(0.0, 10.0);
    match scale {
        GradeScale::Numeric0To10 => format!("{grade:.1}"),
        GradeScale::Numeric0To100 => format!("{}", (grade * 10.0).round() as u32),
        GradeScale::LetterFToA => {
            let letter = if grade >= 9.0 {
                "A"
            } else if grade >= 8.0 {
                "B"
            } else if grade >= 7.0 {
                "C"
            } else if grade >= 6.0 {
                "D"
            } else {
                "F"
            };
            letter.to_string()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedSubject {
    pub theme: String,
    pub name: String,
    /// Reference 0-10 grade.
    pub grade: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level_index: u8,
    pub subjects: Vec<GradedSubject>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub person: Person,
    pub levels: Vec<LevelRecord>,
}

impl StudentRecord {
    pub fn level(&self, level_index: u8) -> Option<&LevelRecord> {
        self.levels.iter().find(|l| l.level_index == level_index)
    }
}

/// Academic record for levels 1-4 with `slots` subjects each. On layout C the
/// two levels sharing a page (1+2, 3+4) share one subject list, since the
/// table has a single subject column.
pub fn build_record(
    person: Person,
    layout: LayoutModel,
    slots: usize,
    subjects: &SubjectDatabase,
    language: &Language,
    bias: &BiasSpec,
    subjects_seed: u64,
    grades_seed: u64,
) -> Result<StudentRecord, DemographyError> {
    let mut subject_rng = rng(subjects_seed);
    let mut grade_rng = rng(grades_seed);
    let mut levels: Vec<LevelRecord> = Vec::with_capacity(MAX_LEVEL as usize);
    for level_index in 1..=MAX_LEVEL {
        let shares_previous = layout == LayoutModel::C && level_index % 2 == 0;
        let picked: Vec<Subject> = if shares_previous {
            let prev = levels.last().expect("odd level precedes even level");
            prev.subjects
                .iter()
                .map(|s| Subject { theme: s.theme.clone(), name: s.name.clone() })
                .collect()
        } else {
            sample_subjects(subjects, language, slots, &mut subject_rng)?
        };
        let graded = picked
            .into_iter()
            .map(|s| {
                let grade = sample_grade(bias, &person.origin, person.gender, &mut grade_rng)?;
                Ok(GradedSubject { theme: s.theme, name: s.name, grade })
            })
            .collect::<Result<Vec<_>, DemographyError>>()?;
        levels.push(LevelRecord { level_index, subjects: graded });
    }
    Ok(StudentRecord { person, levels })
}
