//! End-to-end generation: blueprint, digital pages, physical (warped) pages,
//! and the dataset tree they are written to.
//!
//! ```text
//! <root>/blueprint.json  manifest.json  timing.json  requirements.json
//! <root>/<digital|physical>/<lang>/<school>/{images,labels,evidence,originals}/
//! ```
//!
//! Physical label directories also hold `<sample>.warp.json` next to each
//! label file.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotate::{annotate_page, render_evidence, validate_annotation, AnnotationDoc, LabelVocabulary};
use crate::assets::{AssetPack, SchoolAssets};
use crate::config::{
    build_blueprint, BiasSpec, Blueprint, BlueprintEntry, BlueprintMeta, GradeScale, Language, LayoutModel,
    Requirements, SchoolSpec,
};
use crate::demography::{
    build_record, name_student, spawn_admin, staff_origin, AdminPair, DemographyError, LevelRecord, NameDatabase,
    Person, SubjectDatabase,
};
use crate::json::to_canonical_string;
use crate::seed::rng;
use crate::typeset::{instantiate, layout_page, load_template, mm_to_px, render, TemplateSpec, TypesetError};
use crate::warp::{warp_sample, WarpInput, WarpMetadata};
use crate::{Error, Result, TOOL_VERSION};

pub const BLUEPRINT_FILE: &str = "blueprint.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMING_FILE: &str = "timing.json";
pub const REQUIREMENTS_FILE: &str = "requirements.json";
pub const WARP_SUFFIX: &str = ".warp.json";
/// Samples processed between manifest checkpoints.
const CHECKPOINT_EVERY: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tree {
    Digital,
    Physical,
}

impl Tree {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tree::Digital => "digital",
            Tree::Physical => "physical",
        }
    }
}

/// `<root>/<tree>/<lang>/<slug>`.
pub fn school_dir(root: &Path, tree: Tree, language: &str, slug: &str) -> PathBuf {
    root.join(tree.as_str()).join(language).join(slug)
}

/// Everything known about the content of one page, stored under `originals/`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub sample_id: String,
    pub school: String,
    pub school_slug: String,
    pub language: Language,
    pub layout: LayoutModel,
    pub grade_scale: GradeScale,
    pub student_index: u32,
    pub page: u32,
    pub student: Person,
    pub admins: AdminPair,
    /// Levels printed on this page, grades on the 0-10 reference scale.
    pub levels: Vec<LevelRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleStatus {
    Ok,
    Filtered,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub status: SampleStatus,
    pub reprocess_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub ok: usize,
    pub filtered: usize,
    pub failed: usize,
}

impl StatusCounts {
    pub fn total(&self) -> usize {
        self.ok + self.filtered + self.failed
    }
}

/// Per-sample outcome of a run. Contains nothing time-dependent, so two runs
/// of the same plan produce identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub requirements_hash: String,
    pub master_seed: u64,
    pub digital_only: bool,
    pub annotations_only: bool,
    pub entry_count: usize,
    pub counts: StatusCounts,
    pub samples: BTreeMap<String, ManifestEntry>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    fn recount(&mut self) {
        let mut c = StatusCounts::default();
        for e in self.samples.values() {
            match e.status {
                SampleStatus::Ok => c.ok += 1,
                SampleStatus::Filtered => c.filtered += 1,
                SampleStatus::Failed => c.failed += 1,
            }
        }
        self.counts = c;
    }
}

/// Wall-clock accounting, kept apart from the manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub jobs: usize,
    pub wall_clock_s: f64,
    pub processed: usize,
    pub skipped: usize,
    /// Summed worker time per stage, in seconds.
    pub stages: BTreeMap<String, f64>,
    /// Mean worker time per processed sample for the digital stages.
    pub digital_s_per_sample: f64,
    /// Mean worker time per warped sample.
    pub warp_s_per_sample: f64,
}

#[derive(Clone, Debug, Default)]
pub struct GenerateOptions {
    /// Worker threads; `None` uses all cores.
    pub jobs: Option<usize>,
    /// Process only this many entries, spread across schools.
    pub limit: Option<usize>,
    /// Skip the warp stage.
    pub digital_only: bool,
    /// Write labels, originals and warp metadata but no images.
    pub annotations_only: bool,
    /// Replaces the requirements' master seed.
    pub seed: Option<u64>,
}

pub struct RunSummary {
    pub manifest: RunManifest,
    pub timing: Timing,
    pub blueprint: Blueprint,
}

/// Databases and per-school caches shared read-only by all workers.
struct Context {
    names: NameDatabase,
    subjects: SubjectDatabase,
    vocab: LabelVocabulary,
    schools: HashMap<String, SchoolContext>,
    root: PathBuf,
    digital_only: bool,
    annotations_only: bool,
}

struct SchoolContext {
    spec: SchoolSpec,
    template: TemplateSpec,
    assets: Option<SchoolAssets>,
    admins: AdminPair,
    bias: BiasSpec,
}

#[derive(Default)]
struct StageTimes {
    demography: Duration,
    typeset: Duration,
    assets: Duration,
    annotate: Duration,
    warp: Duration,
    write: Duration,
}

struct Outcome {
    entry: ManifestEntry,
    times: StageTimes,
    warped: bool,
}

/// Indices of the entries a run covers: all of them, or the first `limit`
/// taken round-robin across schools (by student, then page).
pub fn select_entries(bp: &Blueprint, limit: Option<usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..bp.entries.len()).collect();
    if let Some(n) = limit {
        idx.sort_by_key(|&i| (bp.entries[i].student_index, bp.entries[i].page, i));
        idx.truncate(n);
        idx.sort_unstable();
    }
    idx
}

/// Runs the whole pipeline into `out`. Samples already marked ok or filtered
/// in an existing manifest for the same plan are skipped.
pub fn generate(req: &Requirements, pack: &AssetPack, out: &Path, opts: &GenerateOptions) -> Result<RunSummary> {
    let started = Instant::now();
    let mut req = req.clone();
    if let Some(seed) = opts.seed {
        req.master_seed = seed;
    }
    let full = build_blueprint(&req);
    let selected = select_entries(&full, opts.limit);
    let mut blueprint = Blueprint {
        meta: BlueprintMeta { entry_count: selected.len(), ..full.meta.clone() },
        entries: selected.iter().map(|&i| full.entries[i].clone()).collect(),
    };

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_text(&out.join(REQUIREMENTS_FILE), &canonical(&req))?;

    let mut manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        requirements_hash: blueprint.meta.requirements_hash.clone(),
        master_seed: req.master_seed,
        digital_only: opts.digital_only,
        annotations_only: opts.annotations_only,
        entry_count: blueprint.entries.len(),
        counts: StatusCounts::default(),
        samples: BTreeMap::new(),
    };
    let previous = previous_manifest(out, &manifest);
    let planned: std::collections::HashSet<&str> = blueprint.entries.iter().map(|e| e.sample_id.as_str()).collect();
    for (id, entry) in previous {
        if planned.contains(id.as_str()) && entry.status != SampleStatus::Failed {
            manifest.samples.insert(id, entry);
        }
    }

    let todo: Vec<&BlueprintEntry> = blueprint
        .entries
        .iter()
        .filter(|e| {
            !manifest.samples.contains_key(&e.sample_id)
                || !label_path(out, Tree::Digital, e).exists()
        })
        .collect();
    let skipped = blueprint.entries.len() - todo.len();
    let processed = todo.len();

    let ctx = Arc::new(build_context(&req, pack, out, opts, &blueprint)?);
    let jobs = opts.jobs.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");

    let mut totals = StageTimes::default();
    let mut warped = 0usize;
    for chunk in todo.chunks(CHECKPOINT_EVERY) {
        let outcomes: Vec<Outcome> = pool.install(|| chunk.par_iter().map(|e| process(&ctx, e)).collect());
        for (e, o) in chunk.iter().zip(outcomes) {
            totals.demography += o.times.demography;
            totals.typeset += o.times.typeset;
            totals.assets += o.times.assets;
            totals.annotate += o.times.annotate;
            totals.warp += o.times.warp;
            totals.write += o.times.write;
            warped += o.warped as usize;
            manifest.samples.insert(e.sample_id.clone(), o.entry);
        }
        manifest.recount();
        write_text(&out.join(MANIFEST_FILE), &canonical(&manifest))?;
    }
    manifest.recount();
    write_text(&out.join(MANIFEST_FILE), &canonical(&manifest))?;

    for entry in &mut blueprint.entries {
        entry.reprocess_flag = manifest.samples.get(&entry.sample_id).is_some_and(|m| m.reprocess_flag);
    }
    blueprint.write(&out.join(BLUEPRINT_FILE))?;

    let secs = |d: Duration| d.as_secs_f64();
    let digital = totals.demography + totals.typeset + totals.assets + totals.annotate;
    let timing = Timing {
        jobs,
        wall_clock_s: started.elapsed().as_secs_f64(),
        processed,
        skipped,
        stages: BTreeMap::from([
            ("demography".to_string(), secs(totals.demography)),
            ("typeset".to_string(), secs(totals.typeset)),
            ("assets".to_string(), secs(totals.assets)),
            ("annotate".to_string(), secs(totals.annotate)),
            ("warp".to_string(), secs(totals.warp)),
            ("write".to_string(), secs(totals.write)),
        ]),
        digital_s_per_sample: if processed > 0 { secs(digital) / processed as f64 } else { 0.0 },
        warp_s_per_sample: if warped > 0 { secs(totals.warp) / warped as f64 } else { 0.0 },
    };
    write_text(&out.join(TIMING_FILE), &canonical(&timing))?;
    Ok(RunSummary { manifest, timing, blueprint })
}

fn previous_manifest(out: &Path, current: &RunManifest) -> BTreeMap<String, ManifestEntry> {
    match RunManifest::read(&out.join(MANIFEST_FILE)) {
        Ok(m)
            if m.requirements_hash == current.requirements_hash
                && m.master_seed == current.master_seed
                && m.digital_only == current.digital_only
                && m.annotations_only == current.annotations_only
                && m.tool_version == current.tool_version =>
        {
            m.samples
        }
        _ => BTreeMap::new(),
    }
}

fn build_context(
    req: &Requirements,
    pack: &AssetPack,
    out: &Path,
    opts: &GenerateOptions,
    bp: &Blueprint,
) -> Result<Context> {
    let names = pack.load_names()?;
    let subjects = pack.load_subjects()?;
    let mut schools = HashMap::new();
    for entry in &bp.entries {
        if schools.contains_key(&entry.school_slug) {
            continue;
        }
        let spec = req
            .school(&entry.school_slug)
            .cloned()
            .expect("blueprint entries reference configured schools");
        let template = load_template(&pack.templates_dir(), &spec.template_id)?;
        if template.layout != spec.layout_model || template.language != spec.language {
            return Err(TypesetError::template(
                &pack.template_path(&spec.template_id),
                format!(
                    "template is {} {} but school {} is {} {}",
                    template.language,
                    template.layout.as_str(),
                    spec.name,
                    spec.language,
                    spec.layout_model.as_str()
                ),
            )
            .into());
        }
        let assets = if opts.annotations_only {
            None
        } else {
            let anchor = &template.assets.badge;
            let px = (mm_to_px(anchor.x_mm).round() as u32, mm_to_px(anchor.y_mm).round() as u32);
            Some(SchoolAssets::load(&pack.visual_dir(&spec.template_id), px)?)
        };
        let origin = staff_origin(req, &spec.language)
            .ok_or_else(|| DemographyError::UnknownLanguage(spec.language.0.clone()))?;
        let admins = spawn_admin(&names, &origin, entry.seeds.admin)?;
        let bias = req
            .bias
            .get(&spec.language)
            .cloned()
            .ok_or_else(|| DemographyError::UnknownLanguage(spec.language.0.clone()))?;
        schools.insert(entry.school_slug.clone(), SchoolContext { spec, template, assets, admins, bias });
    }
    Ok(Context {
        names,
        subjects,
        vocab: LabelVocabulary::bundled(),
        schools,
        root: out.to_path_buf(),
        digital_only: opts.digital_only,
        annotations_only: opts.annotations_only,
    })
}

pub fn label_path(root: &Path, tree: Tree, e: &BlueprintEntry) -> PathBuf {
    school_dir(root, tree, e.language.as_str(), &e.school_slug)
        .join("labels")
        .join(format!("{}.json", e.sample_id))
}

fn process(ctx: &Context, e: &BlueprintEntry) -> Outcome {
    let mut times = StageTimes::default();
    let mut warped = false;
    let result = run_sample(ctx, e, &mut times, &mut warped);
    let entry = match result {
        Ok(meta) => match meta {
            Some(m) => ManifestEntry {
                status: if m.valid { SampleStatus::Ok } else { SampleStatus::Filtered },
                reprocess_flag: m.reprocessed() || !m.valid,
                error: None,
            },
            None => ManifestEntry { status: SampleStatus::Ok, reprocess_flag: false, error: None },
        },
        Err(err) => ManifestEntry { status: SampleStatus::Failed, reprocess_flag: false, error: Some(err.to_string()) },
    };
    Outcome { entry, times, warped }
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let v = f();
    *slot += t.elapsed();
    v
}

fn run_sample(ctx: &Context, e: &BlueprintEntry, times: &mut StageTimes, warped: &mut bool) -> Result<Option<WarpMetadata>> {
    let school = &ctx.schools[&e.school_slug];
    let template = &school.template;

    let record = timed(&mut times.demography, || -> Result<_> {
        let student = name_student(&ctx.names, e.gender, &e.origin, e.seeds.name)?;
        Ok(build_record(
            student,
            e.layout,
            template.subjects_per_level,
            &ctx.subjects,
            &e.language,
            &school.bias,
            e.seeds.subjects,
            e.seeds.grades,
        )?)
    })?;

    let layout = timed(&mut times.typeset, || -> Result<_> {
        let doc = instantiate(template, &record, &school.admins, e.page, school.spec.grade_scale, e.seeds.document)?;
        Ok(layout_page(&doc)?)
    })?;

    let labels = timed(&mut times.annotate, || -> Result<AnnotationDoc> {
        let doc = annotate_page(&layout, &e.language)?;
        check_labels(&e.sample_id, &doc, &ctx.vocab)?;
        Ok(doc)
    })?;

    let raster = if ctx.annotations_only {
        None
    } else {
        let mut page = timed(&mut times.typeset, || render(&layout));
        timed(&mut times.assets, || -> Result<()> {
            if let Some(assets) = &school.assets {
                assets.apply(&mut page, &mut rng(e.seeds.assets))?;
            }
            Ok(())
        })?;
        Some(page)
    };

    let shown = e.layout.levels_on_page(e.page);
    let original = SampleRecord {
        sample_id: e.sample_id.clone(),
        school: e.school.clone(),
        school_slug: e.school_slug.clone(),
        language: e.language.clone(),
        layout: e.layout,
        grade_scale: school.spec.grade_scale,
        student_index: e.student_index,
        page: e.page,
        student: record.person.clone(),
        admins: school.admins.clone(),
        levels: record.levels.iter().filter(|l| shown.contains(&l.level_index)).cloned().collect(),
    };
    let original_json = canonical(&original);

    timed(&mut times.write, || -> Result<()> {
        let dir = school_dir(&ctx.root, Tree::Digital, e.language.as_str(), &e.school_slug);
        write_sample(&dir, &e.sample_id, &labels, &original_json, raster.as_ref())
    })?;

    if ctx.digital_only {
        return Ok(None);
    }

    let input = match &raster {
        Some(page) => WarpInput::Raster(page),
        None => WarpInput::Size(layout.width, layout.height),
    };
    let out = timed(&mut times.warp, || warp_sample(input, &labels, &e.visual, e.seeds.warp, e.seeds.photometric))?;
    *warped = true;
    check_labels(&e.sample_id, &out.doc, &ctx.vocab)?;
    timed(&mut times.write, || -> Result<()> {
        let dir = school_dir(&ctx.root, Tree::Physical, e.language.as_str(), &e.school_slug);
        write_sample(&dir, &e.sample_id, &out.doc, &original_json, out.image.as_ref())?;
        write_text(
            &dir.join("labels").join(format!("{}{WARP_SUFFIX}", e.sample_id)),
            &canonical(&out.metadata),
        )
    })?;
    Ok(Some(out.metadata))
}

fn check_labels(sample_id: &str, doc: &AnnotationDoc, vocab: &LabelVocabulary) -> Result<()> {
    let violations = validate_annotation(doc, vocab);
    if violations.is_empty() {
        return Ok(());
    }
    let details = violations.iter().take(5).map(|v| format!("{v:?}")).collect::<Vec<_>>().join("; ");
    Err(Error::InvalidAnnotation { sample_id: sample_id.to_string(), details })
}

fn write_sample(dir: &Path, id: &str, labels: &AnnotationDoc, original_json: &str, image: Option<&RgbImage>) -> Result<()> {
    write_text(&dir.join("labels").join(format!("{id}.json")), &labels.to_json())?;
    write_text(&dir.join("originals").join(format!("{id}.json")), original_json)?;
    if let Some(img) = image {
        write_png(&dir.join("images").join(format!("{id}.png")), img)?;
        write_png(&dir.join("evidence").join(format!("{id}.png")), &render_evidence(img, labels))?;
    }
    Ok(())
}

/// Writes through a temporary file so readers never see a partial file.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let encoder = PngEncoder::new_with_quality(BufWriter::new(file), CompressionType::Fast, FilterType::Sub);
    img.write_with_encoder(encoder).map_err(|e| Error::image(path, e))
}

fn canonical<T: Serialize>(value: &T) -> String {
    to_canonical_string(value).expect("plain data serializes")
}
