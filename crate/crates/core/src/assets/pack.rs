use std::path::{Path, PathBuf};

use crate::demography::{DemographyError, NameDatabase, SubjectDatabase};

/// Environment variable that points the pipeline at another asset pack.
pub const ASSETS_ENV: &str = "GRADESYNTH_ASSETS";

/// Root of an asset pack: `text/names`, `text/subjects`, `templates` and
/// `visual/<school>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssetPack {
    root: PathBuf,
}

impl AssetPack {
    pub fn at(root: impl Into<PathBuf>) -> Self {
        AssetPack { root: root.into() }
    }

    /// The pack shipped in the repository's `assets/` directory.
    pub fn bundled() -> Self {
        AssetPack::at(concat!(env!("CARGO_MANIFEST_DIR"), "/../../assets"))
    }

    /// `$GRADESYNTH_ASSETS` if set, otherwise the bundled pack.
    pub fn from_env() -> Self {
        match std::env::var_os(ASSETS_ENV) {
            Some(root) if !root.is_empty() => AssetPack::at(root),
            _ => AssetPack::bundled(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn names_dir(&self) -> PathBuf {
        self.root.join("text").join("names")
    }

    pub fn subjects_dir(&self) -> PathBuf {
        self.root.join("text").join("subjects")
    }

    pub fn templates_dir(&self) -> PathBuf {
        self.root.join("templates")
    }

    pub fn template_path(&self, template_id: &str) -> PathBuf {
        self.templates_dir().join(format!("{template_id}.toml"))
    }

    pub fn visual_dir(&self, school_slug: &str) -> PathBuf {
        self.root.join("visual").join(school_slug)
    }

    pub fn load_names(&self) -> Result<NameDatabase, DemographyError> {
        NameDatabase::load_dir(&self.names_dir())
    }

    pub fn load_subjects(&self) -> Result<SubjectDatabase, DemographyError> {
        SubjectDatabase::load_dir(&self.subjects_dir())
    }
}
