use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use super::DemographyError;
use crate::config::Language;

pub const SUBJECTS_FORMAT: &str = "gradesynth-subjects/1";

/// The subject themes every language must cover, as label slugs.
pub const THEMES: [&str; 26] = [
    "mathematics",
    "language",
    "literature",
    "foreign-language",
    "physics",
    "chemistry",
    "biology",
    "earth-science",
    "history",
    "geography",
    "social-studies",
    "economics",
    "business",
    "philosophy",
    "ethics",
    "religion",
    "art",
    "music",
    "drama",
    "physical-education",
    "technology",
    "computer-science",
    "technical-drawing",
    "classical-languages",
    "health",
    "psychology",
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubjectFile {
    format: String,
    language: Language,
    themes: BTreeMap<String, Vec<String>>,
}

/// Subject-name synonyms grouped by theme, per language.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubjectDatabase {
    languages: BTreeMap<Language, BTreeMap<String, Vec<String>>>,
}

impl SubjectDatabase {
    pub fn load_dir(dir: &Path) -> Result<Self, DemographyError> {
        let mut db = SubjectDatabase::default();
        for path in super::toml_files(dir)? {
            let text = super::read(&path)?;
            let file: SubjectFile = toml::from_str(&text)
                .map_err(|e| DemographyError::database(&path, e.to_string()))?;
            if file.format != SUBJECTS_FORMAT {
                return Err(DemographyError::database(
                    &path,
                    format!("unsupported format `{}`", file.format),
                ));
            }
            db.insert(file.language, file.themes)
                .map_err(|msg| DemographyError::database(&path, msg))?;
        }
        Ok(db)
    }

    /// Adds a language after checking it covers exactly [`THEMES`] with
    /// non-empty, duplicate-free synonym lists.
    pub fn insert(
        &mut self,
        language: Language,
        themes: BTreeMap<String, Vec<String>>,
    ) -> Result<(), String> {
        let expected: BTreeSet<&str> = THEMES.iter().copied().collect();
        let got: BTreeSet<&str> = themes.keys().map(String::as_str).collect();
        if expected != got {
            let missing: Vec<_> = expected.difference(&got).collect();
            let extra: Vec<_> = got.difference(&expected).collect();
            return Err(format!("themes differ: missing {missing:?}, unexpected {extra:?}"));
        }
        for (theme, synonyms) in &themes {
            if synonyms.is_empty() || synonyms.iter().any(|s| s.trim().is_empty()) {
                return Err(format!("theme {theme} has an empty synonym"));
            }
            let unique: BTreeSet<&String> = synonyms.iter().collect();
            if unique.len() != synonyms.len() {
                return Err(format!("theme {theme} repeats a synonym"));
            }
        }
        self.languages.insert(language, themes);
        Ok(())
    }

    pub fn languages(&self) -> impl Iterator<Item = &Language> {
        self.languages.keys()
    }

    /// Synonyms of `theme` in `language`.
    pub fn synonyms(&self, language: &Language, theme: &str) -> Option<&[String]> {
        self.languages.get(language)?.get(theme).map(Vec::as_slice)
    }

    pub fn has_language(&self, language: &Language) -> bool {
        self.languages.contains_key(language)
    }
}
