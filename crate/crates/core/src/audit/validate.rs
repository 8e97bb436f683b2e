use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{label_files, CorruptSample};
use super::AuditError;
use crate::annotate::{validate_annotation, AnnotationDoc, LabelVocabulary, Violation};
use crate::pipeline::{RunManifest, SampleStatus, Tree, MANIFEST_FILE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileViolations {
    pub path: PathBuf,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeValidation {
    pub label_files: usize,
    pub violations: Vec<FileViolations>,
    pub corrupt: Vec<CorruptSample>,
    /// Disagreements between the run manifest and the files on disk.
    pub manifest_issues: Vec<String>,
}

impl TreeValidation {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.corrupt.is_empty() && self.manifest_issues.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.violations.iter().map(|f| f.violations.len()).sum()
    }
}

/// Runs the annotation checks over every label file of both trees and
/// cross-checks the run manifest.
pub fn validate_tree(root: &Path, vocab: &LabelVocabulary) -> Result<TreeValidation, AuditError> {
    let mut files = label_files(root, Tree::Digital, false)?;
    let digital = files.len();
    files.extend(label_files(root, Tree::Physical, false)?);
    let results: Vec<Result<Vec<Violation>, CorruptSample>> = files
        .par_iter()
        .map(|(_, _, path)| {
            let corrupt = |message: String| CorruptSample { path: path.clone(), message };
            let text = std::fs::read_to_string(path).map_err(|e| corrupt(e.to_string()))?;
            let doc = AnnotationDoc::from_json(&text).map_err(|e| corrupt(e.to_string()))?;
            Ok(validate_annotation(&doc, vocab))
        })
        .collect();

    let mut out = TreeValidation { label_files: files.len(), ..TreeValidation::default() };
    for ((_, _, path), r) in files.iter().zip(results) {
        match r {
            Ok(v) if v.is_empty() => {}
            Ok(violations) => out.violations.push(FileViolations {
                path: path.strip_prefix(root).unwrap_or(path).to_path_buf(),
                violations,
            }),
            Err(c) => out.corrupt.push(c),
        }
    }

    let manifest_path = root.join(MANIFEST_FILE);
    if manifest_path.exists() {
        match RunManifest::read(&manifest_path) {
            Ok(m) => {
                if m.counts.total() != m.entry_count {
                    out.manifest_issues.push(format!(
                        "status counts sum to {} but the plan has {} entries",
                        m.counts.total(),
                        m.entry_count
                    ));
                }
                let written = m.samples.values().filter(|e| e.status != SampleStatus::Failed).count();
                if written != digital {
                    out.manifest_issues.push(format!(
                        "manifest lists {written} written samples but {digital} digital label files exist"
                    ));
                }
            }
            Err(e) => out.manifest_issues.push(e.to_string()),
        }
    }
    Ok(out)
}
