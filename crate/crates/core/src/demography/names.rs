use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::DemographyError;
use crate::config::{Gender, Origin};

pub const NAMES_FORMAT: &str = "gradesynth-names/1";

/// Given names per gender plus family names for one origin.
#[derive(Clone, Debug, PartialEq)]
pub struct NamePool {
    pub origin: Origin,
    pub female: Vec<String>,
    pub male: Vec<String>,
    pub family: Vec<String>,
}

impl NamePool {
    pub fn given(&self, gender: Gender) -> &[String] {
        match gender {
            Gender::Female => &self.female,
            Gender::Male => &self.male,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NameFile {
    format: String,
    origin: Origin,
    female: Vec<String>,
    male: Vec<String>,
    family: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NameDatabase {
    pools: BTreeMap<Origin, NamePool>,
}

impl NameDatabase {
    pub fn from_pools(pools: impl IntoIterator<Item = NamePool>) -> Self {
        NameDatabase {
            pools: pools.into_iter().map(|p| (p.origin.clone(), p)).collect(),
        }
    }

    /// Loads every `*.toml` file in `dir`, one origin per file.
    pub fn load_dir(dir: &Path) -> Result<Self, DemographyError> {
        let mut pools = Vec::new();
        for path in super::toml_files(dir)? {
            let text = super::read(&path)?;
            let file: NameFile = toml::from_str(&text)
                .map_err(|e| DemographyError::database(&path, e.to_string()))?;
            if file.format != NAMES_FORMAT {
                return Err(DemographyError::database(
                    &path,
                    format!("unsupported format `{}`", file.format),
                ));
            }
            pools.push(NamePool {
                origin: file.origin,
                female: file.female,
                male: file.male,
                family: file.family,
            });
        }
        Ok(NameDatabase::from_pools(pools))
    }

    pub fn origins(&self) -> impl Iterator<Item = &Origin> {
        self.pools.keys()
    }

    pub fn pool(&self, origin: &Origin) -> Option<&NamePool> {
        self.pools.get(origin)
    }
}
