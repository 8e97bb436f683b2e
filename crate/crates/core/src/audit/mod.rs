//! Reads a generated dataset tree back: statistics, bias checks and
//! school-held-out train/val/test manifests.

mod bias;
mod report;
mod split;
mod validate;


use std::path::PathBuf;

use thiserror::Error;

pub use bias::{verify_bias, verify_group, BiasCheck, BiasOutcome, DEFAULT_SE_MULTIPLIER, MIN_BIAS_SAMPLES};
pub use report::{
    compute_report, CorruptSample, DatasetReport, DemographicRow, Fraction, GradeGroup, SchoolRow, VisualReport,
    GRADE_BINS,
};
pub use split::{export_split, load_token_records, SplitManifests, SplitSpec, TokenRecord, SPLIT_NAMES};
pub use validate::{validate_tree, FileViolations, TreeValidation};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("school {0:?} not found in the dataset")]
    SchoolNotFound(String),
    #[error("{0} split is empty")]
    EmptySplit(String),
    #[error("school {0:?} listed for both training and testing")]
    OverlappingSchools(String),
    #[error("group {group} has {count} grades, at least {min} needed")]
    InsufficientSamples { group: String, count: usize, min: usize },
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

impl AuditError {
    pub(crate) fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        AuditError::Io { path: path.into(), message: err.to_string() }
    }
}
