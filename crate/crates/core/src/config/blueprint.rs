use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::quota::largest_remainder;
use super::{
    BackgroundMaterial, ConfigError, DemographySampling, Gender, LayoutModel, Origin,
    RenderStyle, Requirements, SchoolSpec,
};
use crate::seed::{derive_seed, derive_seed_tagged, rng, Stage};

/// Timestamp recorded when the requirements do not carry one.
pub const DEFAULT_CREATED: &str = "1970-01-01T00:00:00Z";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    /// Shared by every student of the school.
    pub admin: u64,
    pub name: u64,
    pub subjects: u64,
    pub grades: u64,
    pub document: u64,
    pub assets: u64,
    pub warp: u64,
    pub photometric: u64,
}

impl StageSeeds {
    pub fn derive(master_seed: u64, school: &str, student_index: u32, page: u32) -> Self {
        let i = student_index as u64;
        StageSeeds {
            admin: derive_seed(master_seed, school, 0, Stage::Admin),
            name: derive_seed(master_seed, school, i, Stage::Name),
            subjects: derive_seed(master_seed, school, i, Stage::Subjects),
            grades: derive_seed(master_seed, school, i, Stage::Grades),
            document: derive_seed(master_seed, school, i, Stage::Document),
            assets: derive_seed(master_seed, school, i, Stage::Assets { page }),
            warp: derive_seed(master_seed, school, i, Stage::Warp { page }),
            photometric: derive_seed(master_seed, school, i, Stage::Photometric { page }),
        }
    }
}

/// Photometric features assigned to the physical version of a sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualPlan {
    pub style: RenderStyle,
    pub cloth: bool,
    pub shadow: bool,
    pub objects: bool,
    pub material: BackgroundMaterial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlueprintEntry {
    pub sample_id: String,
    pub school: String,
    pub school_slug: String,
    pub language: super::Language,
    pub layout: LayoutModel,
    pub student_index: u32,
    pub page: u32,
    pub gender: Gender,
    pub origin: Origin,
    pub seeds: StageSeeds,
    pub visual: VisualPlan,
    pub reprocess_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlueprintMeta {
    pub created: String,
    pub requirements_hash: String,
    pub master_seed: u64,
    pub tool_version: String,
    pub entry_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blueprint {
    pub meta: BlueprintMeta,
    pub entries: Vec<BlueprintEntry>,
}

impl Blueprint {
    pub fn to_canonical_json(&self) -> String {
        crate::json::to_canonical_string(self).expect("blueprint serializes")
    }

    pub fn write(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_canonical_json()).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::MalformedConfig(e.to_string()))
    }

    pub fn entry(&self, sample_id: &str) -> Option<&BlueprintEntry> {
        self.entries.iter().find(|e| e.sample_id == sample_id)
    }
}

pub fn sample_id(school_slug: &str, student_index: u32, page: u32) -> String {
    format!("{school_slug}-{student_index:05}-p{page}")
}

/// Expands requirements into one entry per (school, student, page).
pub fn build_blueprint(req: &Requirements) -> Blueprint {
    let mut entries = Vec::new();
    for school in &req.schools {
        let demographics = assign_demographics(req, school);
        let slug = school.slug();
        for (student_index, (gender, origin)) in demographics.into_iter().enumerate() {
            let student_index = student_index as u32;
            for page in 1..=school.pages_per_student {
                entries.push(BlueprintEntry {
                    sample_id: sample_id(&slug, student_index, page),
                    school: school.name.clone(),
                    school_slug: slug.clone(),
                    language: school.language.clone(),
                    layout: school.layout_model,
                    student_index,
                    page,
                    gender,
                    origin: origin.clone(),
                    seeds: StageSeeds::derive(req.master_seed, &school.name, student_index, page),
                    visual: VisualPlan {
                        style: RenderStyle::Scanner,
                        cloth: false,
                        shadow: false,
                        objects: false,
                        material: BackgroundMaterial::Plastic,
                    },
                    reprocess_flag: false,
                });
            }
        }
    }
    assign_visual_plans(req, &mut entries);
    Blueprint {
        meta: BlueprintMeta {
            created: req.created.clone().unwrap_or_else(|| DEFAULT_CREATED.to_string()),
            requirements_hash: req.hash(),
            master_seed: req.master_seed,
            tool_version: crate::TOOL_VERSION.to_string(),
            entry_count: entries.len(),
        },
        entries,
    }
}

/// Gender and origin for every student of `school`, in student order.
fn assign_demographics(req: &Requirements, school: &SchoolSpec) -> Vec<(Gender, Origin)> {
    let origins = &req.origin_probabilities[&school.language];
    let cells: Vec<((Gender, &Origin), f64)> = req
        .gender_probabilities
        .iter()
        .flat_map(|(g, pg)| origins.iter().map(move |(o, po)| ((*g, o), pg * po)))
        .collect();
    let n = req.students_per_school as usize;
    match req.demography_sampling {
        DemographySampling::Quota => {
            let weights: Vec<f64> = cells.iter().map(|(_, w)| *w).collect();
            let counts = largest_remainder(&weights, n);
            let mut pool: Vec<(Gender, Origin)> = Vec::with_capacity(n);
            for (((g, o), _), count) in cells.iter().zip(counts) {
                pool.extend(std::iter::repeat_with(|| (*g, (*o).clone())).take(count));
            }
            let seed = derive_seed_tagged(req.master_seed, &school.name, 0, "demography-quota");
            pool.shuffle(&mut rng(seed));
            pool
        }
        DemographySampling::Independent => (0..n as u64)
            .map(|i| {
                let seed = derive_seed(req.master_seed, &school.name, i, Stage::Demography);
                let mut r = rng(seed);
                let gender = draw(&mut r, req.gender_probabilities.iter().map(|(g, p)| (*g, *p)));
                let origin = draw(&mut r, origins.iter().map(|(o, p)| (o.clone(), *p)));
                (gender, origin)
            })
            .collect(),
    }
}

/// Categorical draw; weights need not be normalized.
fn draw<T: Clone>(r: &mut impl Rng, items: impl Iterator<Item = (T, f64)> + Clone) -> T {
    let total: f64 = items.clone().map(|(_, p)| p).sum();
    let mut u = r.gen::<f64>() * total;
    let mut last = None;
    for (item, p) in items {
        if p <= 0.0 {
            continue;
        }
        if u < p {
            return item;
        }
        u -= p;
        last = Some(item);
    }
    last.expect("at least one positive weight")
}

/// Shuffled boolean mask with exactly `round(fraction * n)` true values.
fn quota_mask(fraction: f64, n: usize, seed: u64) -> Vec<bool> {
    let on = largest_remainder(&[fraction, 1.0 - fraction], n)[0];
    let mut mask: Vec<bool> = (0..n).map(|i| i < on).collect();
    mask.shuffle(&mut rng(seed));
    mask
}

fn quota_labels<T: Clone>(labels: &[(T, f64)], n: usize, seed: u64) -> Vec<T> {
    let weights: Vec<f64> = labels.iter().map(|(_, w)| *w).collect();
    let mut out = Vec::with_capacity(n);
    for ((label, _), count) in labels.iter().zip(largest_remainder(&weights, n)) {
        out.extend(std::iter::repeat(label.clone()).take(count));
    }
    out.shuffle(&mut rng(seed));
    out
}

/// Spreads the configured visual-feature proportions over all entries as exact
/// quotas. Scanner samples lie on the plastic scanner lid; the other styles
/// draw their desk material from the configured weights.
fn assign_visual_plans(req: &Requirements, entries: &mut [BlueprintEntry]) {
    let n = entries.len();
    let seed = |tag: &str| derive_seed_tagged(req.master_seed, "", 0, &format!("visual/{tag}"));
    let styles: Vec<(RenderStyle, f64)> =
        req.visual.styles.iter().map(|(s, w)| (*s, *w)).collect();
    let styles = quota_labels(&styles, n, seed("style"));
    let cloth = quota_mask(req.visual.cloth_fraction, n, seed("cloth"));
    let shadow = quota_mask(req.visual.shadow_fraction, n, seed("shadow"));
    let objects = quota_mask(req.visual.objects_fraction, n, seed("objects"));

    let desk = styles.iter().filter(|s| **s != RenderStyle::Scanner).count();
    let materials: Vec<(BackgroundMaterial, f64)> =
        req.visual.materials.iter().map(|(m, w)| (*m, *w)).collect();
    let mut desk_materials = quota_labels(&materials, desk, seed("material")).into_iter();

    for (i, entry) in entries.iter_mut().enumerate() {
        let style = styles[i];
        let material = if style == RenderStyle::Scanner {
            BackgroundMaterial::Plastic
        } else {
            desk_materials.next().expect("one material per desk sample")
        };
        entry.visual = VisualPlan {
            style,
            cloth: cloth[i],
            shadow: shadow[i],
            objects: objects[i],
            material,
        };
    }
}
