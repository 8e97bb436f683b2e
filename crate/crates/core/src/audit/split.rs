use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::report::{label_files, original_path, read_json, sample_id_of};
use super::AuditError;
use crate::annotate::AnnotationDoc;
use crate::config::slugify;
use crate::pipeline::{SampleRecord, Tree, WARP_SUFFIX};
use crate::seed::rng;
use crate::typeset::BoxPx;
use crate::warp::WarpMetadata;

pub const SPLIT_NAMES: [&str; 3] = ["train", "val", "test"];

/// School-held-out split. Schools are given by name or slug.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    /// Restrict to one language; `None` takes every language.
    pub language: Option<String>,
    pub train_schools: Vec<String>,
    pub test_schools: Vec<String>,
    /// Share of the training schools' samples held out for validation.
    pub val_fraction: f64,
    /// Layout families ('A', 'B', 'C') allowed in the test split; empty
    /// allows all.
    pub test_layouts: Vec<char>,
    /// Use the warped samples (dropping those that failed the validity
    /// filter) instead of the digital ones.
    pub physical: bool,
}

/// Label paths relative to the dataset root, sorted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitManifests {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// One sample as token-classification input: words, their boxes and the
/// label of the segment each word belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenRecord {
    pub sample_id: String,
    pub words: Vec<String>,
    pub boxes: Vec<BoxPx>,
    pub labels: Vec<String>,
}

struct Candidate {
    rel: String,
    slug: String,
    family: char,
}

/// Writes `train.txt`, `val.txt` and `test.txt` into `out_dir` and returns
/// their contents. Validation samples are a seeded random share of the
/// training schools' samples.
pub fn export_split(root: &Path, spec: &SplitSpec, seed: u64, out_dir: &Path) -> Result<SplitManifests, AuditError> {
    let tree = if spec.physical { Tree::Physical } else { Tree::Digital };
    let mut candidates = Vec::new();
    for (lang, slug, path) in label_files(root, tree, false)? {
        if spec.language.as_deref().is_some_and(|l| l != lang) {
            continue;
        }
        if spec.physical {
            let meta_path = path.with_file_name(format!("{}{WARP_SUFFIX}", sample_id_of(&path)));
            let meta: WarpMetadata = read_json(&meta_path)?;
            if !meta.valid {
                continue;
            }
        }
        let record: SampleRecord = read_json(&original_path(&path))?;
        let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
        candidates.push(Candidate { rel, slug, family: record.layout.family() });
    }

    let present: BTreeSet<&str> = candidates.iter().map(|c| c.slug.as_str()).collect();
    let resolve = |names: &[String]| -> Result<BTreeSet<String>, AuditError> {
        names
            .iter()
            .map(|n| {
                let slug = slugify(n);
                if present.contains(slug.as_str()) {
                    Ok(slug)
                } else {
                    Err(AuditError::SchoolNotFound(n.clone()))
                }
            })
            .collect()
    };
    let train_schools = resolve(&spec.train_schools)?;
    let test_schools = resolve(&spec.test_schools)?;
    if let Some(both) = train_schools.intersection(&test_schools).next() {
        return Err(AuditError::OverlappingSchools(both.clone()));
    }

    let mut pool: Vec<String> = Vec::new();
    let mut test: Vec<String> = Vec::new();
    for c in candidates {
        if train_schools.contains(&c.slug) {
            pool.push(c.rel);
        } else if test_schools.contains(&c.slug) && (spec.test_layouts.is_empty() || spec.test_layouts.contains(&c.family)) {
            test.push(c.rel);
        }
    }
    pool.sort();
    pool.shuffle(&mut rng(seed));
    let n_val = (spec.val_fraction.clamp(0.0, 1.0) * pool.len() as f64).round() as usize;
    let mut val: Vec<String> = pool.drain(..n_val).collect();
    let mut train = pool;
    train.sort();
    val.sort();
    test.sort();

    if train.is_empty() {
        return Err(AuditError::EmptySplit("train".into()));
    }
    if val.is_empty() && spec.val_fraction > 0.0 {
        return Err(AuditError::EmptySplit("val".into()));
    }
    if test.is_empty() {
        return Err(AuditError::EmptySplit("test".into()));
    }

    let manifests = SplitManifests { train, val, test };
    fs::create_dir_all(out_dir).map_err(|e| AuditError::io(out_dir, e))?;
    for (name, list) in SPLIT_NAMES.iter().zip([&manifests.train, &manifests.val, &manifests.test]) {
        let path = out_dir.join(format!("{name}.txt"));
        let mut text = list.join("\n");
        if !text.is_empty() {
            text.push('\n');
        }
        fs::write(&path, text).map_err(|e| AuditError::io(&path, e))?;
    }
    Ok(manifests)
}

/// Loads every label file listed in a split manifest (paths relative to
/// `root`) as a token-classification record.
pub fn load_token_records(root: &Path, manifest: &Path) -> Result<Vec<TokenRecord>, AuditError> {
    let text = fs::read_to_string(manifest).map_err(|e| AuditError::io(manifest, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let path: PathBuf = root.join(line.trim());
            let json = fs::read_to_string(&path).map_err(|e| AuditError::io(&path, e))?;
            let doc = AnnotationDoc::from_json(&json)
                .map_err(|e| AuditError::Corrupt { path: path.clone(), message: e.to_string() })?;
            let mut record = TokenRecord {
                sample_id: sample_id_of(&path),
                words: Vec::new(),
                boxes: Vec::new(),
                labels: Vec::new(),
            };
            for entity in &doc.form {
                for w in &entity.words {
                    record.words.push(w.text.clone());
                    record.boxes.push(w.bbox);
                    record.labels.push(entity.label.clone());
                }
            }
            Ok(record)
        })
        .collect()
}
