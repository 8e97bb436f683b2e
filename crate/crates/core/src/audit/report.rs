use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::annotate::AnnotationDoc;
use crate::pipeline::{SampleRecord, Tree, WARP_SUFFIX};
use crate::warp::WarpMetadata;

/// Histogram bins over the 0-10 reference grade scale, one per grade unit.
pub const GRADE_BINS: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub count: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptSample {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SchoolRow {
    pub name: String,
    pub language: String,
    pub layout: String,
    pub students: usize,
    pub digital: usize,
    pub physical: usize,
    pub filtered: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemographicRow {
    pub language: String,
    pub gender: String,
    pub origin: String,
    pub students: usize,
    pub samples: usize,
    /// Share of all digital samples.
    pub fraction: f64,
    /// Share of the digital samples of this language.
    pub language_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradeGroup {
    pub language: String,
    pub origin: String,
    pub gender: String,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
    pub histogram: Vec<u64>,
}

impl GradeGroup {
    pub fn name(&self) -> String {
        format!("{}/{}/{}", self.language, self.origin, self.gender)
    }
}

/// Feature shares over the warp metadata files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VisualReport {
    pub samples: usize,
    pub style: BTreeMap<String, Fraction>,
    pub cloth: BTreeMap<String, Fraction>,
    pub shadow: BTreeMap<String, Fraction>,
    pub objects: BTreeMap<String, Fraction>,
    pub material: BTreeMap<String, Fraction>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub digital_samples: usize,
    pub physical_samples: usize,
    /// Physical samples whose warp failed the validity filter.
    pub filtered_samples: usize,
    pub reprocessed_samples: usize,
    pub corrupt: Vec<CorruptSample>,
    pub schools: BTreeMap<String, SchoolRow>,
    pub languages: BTreeMap<String, Fraction>,
    pub layouts: BTreeMap<String, Fraction>,
    pub demographics: Vec<DemographicRow>,
    pub grades: Vec<GradeGroup>,
    pub visual: VisualReport,
    /// Distinct labels across all digital label files.
    pub label_classes: Vec<String>,
}

/// Label files of every school directory in one tree, as (lang, slug, path),
/// sorted.
pub(crate) fn label_files(root: &Path, tree: Tree, suffix_warp: bool) -> Result<Vec<(String, String, PathBuf)>, AuditError> {
    let mut out = Vec::new();
    let base = root.join(tree.as_str());
    for lang in sorted_dirs(&base)? {
        for slug in sorted_dirs(&base.join(&lang))? {
            let dir = base.join(&lang).join(&slug).join("labels");
            if !dir.is_dir() {
                continue;
            }
            for entry in fs::read_dir(&dir).map_err(|e| AuditError::io(&dir, e))? {
                let path = entry.map_err(|e| AuditError::io(&dir, e))?.path();
                let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
                let is_warp = name.ends_with(WARP_SUFFIX);
                if name.ends_with(".json") && is_warp == suffix_warp {
                    out.push((lang.clone(), slug.clone(), path));
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

fn sorted_dirs(dir: &Path) -> Result<Vec<String>, AuditError> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| AuditError::io(dir, e))? {
        let entry = entry.map_err(|e| AuditError::io(dir, e))?;
        if entry.path().is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// Sample id of a label or warp metadata file.
pub(crate) fn sample_id_of(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    name.strip_suffix(WARP_SUFFIX).or_else(|| name.strip_suffix(".json")).unwrap_or(name).to_string()
}

/// `originals/<id>.json` next to a `labels/<id>.json`.
pub(crate) fn original_path(label: &Path) -> PathBuf {
    let dir = label.parent().and_then(Path::parent).unwrap_or(Path::new("."));
    dir.join("originals").join(format!("{}.json", sample_id_of(label)))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, AuditError> {
    let text = fs::read_to_string(path).map_err(|e| AuditError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AuditError::Corrupt { path: path.to_path_buf(), message: e.to_string() })
}

struct DigitalSample {
    labels: BTreeSet<String>,
    record: SampleRecord,
}

/// Scans the tree under `root`. Unreadable samples are listed in
/// `corrupt` and otherwise ignored.
pub fn compute_report(root: &Path) -> Result<DatasetReport, AuditError> {
    let mut report = DatasetReport::default();

    let digital_files = label_files(root, Tree::Digital, false)?;
    let digital: Vec<Result<DigitalSample, CorruptSample>> = digital_files
        .par_iter()
        .map(|(_, _, path)| {
            let corrupt = |e: AuditError| CorruptSample { path: path.clone(), message: e.to_string() };
            let text = fs::read_to_string(path).map_err(|e| corrupt(AuditError::io(path, e)))?;
            let doc = AnnotationDoc::from_json(&text)
                .map_err(|e| CorruptSample { path: path.clone(), message: e.to_string() })?;
            let record: SampleRecord = read_json(&original_path(path)).map_err(corrupt)?;
            Ok(DigitalSample { labels: doc.labels().map(str::to_string).collect(), record })
        })
        .collect();

    let mut labels = BTreeSet::new();
    let mut students: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
    let mut demo: BTreeMap<(String, String, String), (BTreeSet<(String, u32)>, usize)> = BTreeMap::new();
    let mut grades: BTreeMap<(String, String, String), Vec<f64>> = BTreeMap::new();
    for sample in digital {
        let s = match sample {
            Ok(s) => s,
            Err(c) => {
                report.corrupt.push(c);
                continue;
            }
        };
        let r = &s.record;
        labels.extend(s.labels);
        report.digital_samples += 1;
        let lang = r.language.as_str().to_string();
        report.languages.entry(lang.clone()).or_default().count += 1;
        report.layouts.entry(r.layout.as_str().to_string()).or_default().count += 1;
        let row = report.schools.entry(r.school_slug.clone()).or_insert_with(|| SchoolRow {
            name: r.school.clone(),
            language: lang.clone(),
            layout: r.layout.as_str().to_string(),
            ..SchoolRow::default()
        });
        row.digital += 1;
        students.entry(r.school_slug.clone()).or_default().insert(r.student_index);
        let key = (lang, r.student.gender.as_str().to_string(), r.student.origin.as_str().to_string());
        let cell = demo.entry(key.clone()).or_default();
        cell.0.insert((r.school_slug.clone(), r.student_index));
        cell.1 += 1;
        let group = grades.entry((key.0, key.2, key.1)).or_default();
        for level in &r.levels {
            group.extend(level.subjects.iter().map(|s| s.grade));
        }
    }
    for (slug, set) in students {
        if let Some(row) = report.schools.get_mut(&slug) {
            row.students = set.len();
        }
    }
    report.label_classes = labels.into_iter().collect();
    finish_fractions(&mut report.languages);
    finish_fractions(&mut report.layouts);

    let total = report.digital_samples;
    for ((language, gender, origin), (studs, samples)) in demo {
        let lang_total = report.languages.get(&language).map_or(0, |f| f.count);
        report.demographics.push(DemographicRow {
            language,
            gender,
            origin,
            students: studs.len(),
            samples,
            fraction: ratio(samples, total),
            language_fraction: ratio(samples, lang_total),
        });
    }
    report.grades = grades
        .into_iter()
        .map(|((language, origin, gender), values)| grade_group(language, origin, gender, &values))
        .collect();

    let warp_files = label_files(root, Tree::Physical, true)?;
    report.physical_samples = label_files(root, Tree::Physical, false)?.len();
    let metas: Vec<(String, Result<WarpMetadata, AuditError>)> =
        warp_files.par_iter().map(|(_, slug, path)| (slug.clone(), read_json(path))).collect();
    let v = &mut report.visual;
    for ((_, _, path), (slug, meta)) in warp_files.iter().zip(metas) {
        let m = match meta {
            Ok(m) => m,
            Err(e) => {
                report.corrupt.push(CorruptSample { path: path.clone(), message: e.to_string() });
                continue;
            }
        };
        v.samples += 1;
        let plan = &m.visual;
        bump(&mut v.style, &enum_name(&plan.style));
        bump(&mut v.cloth, if plan.cloth { "cloth" } else { "plane" });
        bump(&mut v.shadow, if plan.shadow { "true" } else { "false" });
        bump(&mut v.objects, if plan.objects { "true" } else { "false" });
        bump(&mut v.material, &enum_name(&plan.material));
        if let Some(row) = report.schools.get_mut(&slug) {
            row.physical += 1;
            row.filtered += (!m.valid) as usize;
        }
        report.filtered_samples += (!m.valid) as usize;
        report.reprocessed_samples += m.reprocessed() as usize;
    }
    for map in [&mut v.style, &mut v.cloth, &mut v.shadow, &mut v.objects, &mut v.material] {
        finish_fractions(map);
    }
    Ok(report)
}

fn enum_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn bump(map: &mut BTreeMap<String, Fraction>, key: &str) {
    map.entry(key.to_string()).or_default().count += 1;
}

fn ratio(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

fn finish_fractions(map: &mut BTreeMap<String, Fraction>) {
    let total: usize = map.values().map(|f| f.count).sum();
    for f in map.values_mut() {
        f.fraction = ratio(f.count, total);
    }
}

fn grade_group(language: String, origin: String, gender: String, values: &[f64]) -> GradeGroup {
    let n = values.len();
    let mean = if n == 0 { 0.0 } else { values.iter().sum::<f64>() / n as f64 };
    let var = if n < 2 { 0.0 } else { values.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1) as f64 };
    let mut histogram = vec![0u64; GRADE_BINS];
    for g in values {
        let bin = ((g / 10.0 * GRADE_BINS as f64).floor() as usize).min(GRADE_BINS - 1);
        histogram[bin] += 1;
    }
    GradeGroup { language, origin, gender, count: n, mean, std: var.sqrt(), histogram }
}

impl DatasetReport {
    pub fn to_json(&self) -> String {
        crate::json::to_canonical_string(self).expect("report serializes")
    }

    /// Human-readable tables.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let pct = |f: f64| format!("{:6.2}%", f * 100.0);
        let _ = writeln!(
            s,
            "samples: {} digital, {} physical ({} filtered, {} reprocessed), {} corrupt",
            self.digital_samples,
            self.physical_samples,
            self.filtered_samples,
            self.reprocessed_samples,
            self.corrupt.len()
        );
        let _ = writeln!(s, "label classes: {}", self.label_classes.len());

        let _ = writeln!(s, "\n{:<24} {:<4} {:<16} {:>8} {:>8} {:>8} {:>8}", "school", "lang", "layout", "students", "digital", "physical", "filtered");
        for (slug, r) in &self.schools {
            let _ = writeln!(
                s,
                "{:<24} {:<4} {:<16} {:>8} {:>8} {:>8} {:>8}",
                slug, r.language, r.layout, r.students, r.digital, r.physical, r.filtered
            );
        }

        let _ = writeln!(s, "\n{:<16} {:>8} {:>8}", "layout", "samples", "share");
        for (k, f) in &self.layouts {
            let _ = writeln!(s, "{:<16} {:>8} {}", k, f.count, pct(f.fraction));
        }

        let _ = writeln!(s, "\n{:<4} {:<8} {:<12} {:>8} {:>8} {:>8} {:>8}", "lang", "gender", "origin", "students", "samples", "total", "in lang");
        for r in &self.demographics {
            let _ = writeln!(
                s,
                "{:<4} {:<8} {:<12} {:>8} {:>8} {} {}",
                r.language,
                r.gender,
                r.origin,
                r.students,
                r.samples,
                pct(r.fraction),
                pct(r.language_fraction)
            );
        }

        let _ = writeln!(s, "\n{:<4} {:<12} {:<8} {:>8} {:>6} {:>6}  histogram 0-10", "lang", "origin", "gender", "grades", "mean", "std");
        for g in &self.grades {
            let hist: Vec<String> = g.histogram.iter().map(u64::to_string).collect();
            let _ = writeln!(
                s,
                "{:<4} {:<12} {:<8} {:>8} {:>6.2} {:>6.2}  {}",
                g.language,
                g.origin,
                g.gender,
                g.count,
                g.mean,
                g.std,
                hist.join(" ")
            );
        }

        let v = &self.visual;
        let _ = writeln!(s, "\nvisual features over {} warped samples", v.samples);
        for (name, map) in [
            ("style", &v.style),
            ("cloth", &v.cloth),
            ("shadow", &v.shadow),
            ("objects", &v.objects),
            ("material", &v.material),
        ] {
            for (k, f) in map {
                let _ = writeln!(s, "{:<10} {:<10} {:>8} {}", name, k, f.count, pct(f.fraction));
            }
        }

        if !self.corrupt.is_empty() {
            let _ = writeln!(s, "\ncorrupt samples:");
            for c in &self.corrupt {
                let _ = writeln!(s, "  {}: {}", c.path.display(), c.message);
            }
        }
        s
    }
}
