use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gradesynth::annotate::{render_evidence, AnnotationDoc, LabelVocabulary};
use gradesynth::assets::AssetPack;
use gradesynth::audit::{self, BiasOutcome, SplitSpec};
use gradesynth::config::{parse_requirements, Requirements};
use gradesynth::pipeline::{self, GenerateOptions, Tree, REQUIREMENTS_FILE};
use gradesynth::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

/// Synthetic school transcripts with word-level layout labels.
#[derive(Parser)]
#[command(name = "gradesynth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset from a requirements file.
    Generate(GenerateArgs),
    /// Print dataset statistics.
    Audit(AuditArgs),
    /// Write school-held-out train/val/test manifests.
    Split(SplitArgs),
    /// Check every label file of a dataset.
    Validate(ValidateArgs),
    /// Redraw the label overlay of one sample.
    Evidence(EvidenceArgs),
}

#[derive(Args)]
struct GenerateArgs {
    requirements: PathBuf,
    #[arg(short, long)]
    out: PathBuf,
    /// Skip the camera/warp stage.
    #[arg(long)]
    digital_only: bool,
    /// Write labels and metadata but no images.
    #[arg(long)]
    annotations_only: bool,
    /// Override the master seed of the requirements file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    jobs: Option<usize>,
    /// Generate at most this many samples, spread across schools.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AuditArgs {
    root: PathBuf,
    #[arg(long)]
    json: bool,
    /// Also compare grade means with the configured bias.
    #[arg(long)]
    verify_bias: bool,
    /// Bias tolerance in grade units (default: three standard errors).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Exit with 1 on corrupt samples or failed bias checks.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SplitArgs {
    root: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    train: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    test: Vec<String>,
    #[arg(long, default_value_t = 0.2)]
    val_fraction: f64,
    /// Layout families allowed in the test split, e.g. `AB`.
    #[arg(long, default_value = "")]
    test_layouts: String,
    #[arg(long)]
    language: Option<String>,
    /// Split the warped samples instead of the digital ones.
    #[arg(long)]
    physical: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ValidateArgs {
    root: PathBuf,
    #[arg(long)]
    json: bool,
    /// Exit with 1 if anything is wrong.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct EvidenceArgs {
    root: PathBuf,
    sample_id: String,
    #[arg(long)]
    physical: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Audit(a) => audit_cmd(a),
        Command::Split(a) => split(a),
        Command::Validate(a) => validate(a),
        Command::Evidence(a) => evidence(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() {
                EXIT_CONFIG
            } else if e.is_io() {
                EXIT_IO
            } else {
                EXIT_VALIDATION
            })
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", gradesynth::json::to_canonical_string(value).expect("serializable").trim_end());
}

fn generate(a: GenerateArgs) -> Result<u8, Error> {
    let pack = AssetPack::from_env();
    let names = pack.load_names()?;
    let req = parse_requirements(&a.requirements, &names)?;
    let opts = GenerateOptions {
        jobs: a.jobs,
        limit: a.limit,
        digital_only: a.digital_only,
        annotations_only: a.annotations_only,
        seed: a.seed,
    };
    let run = pipeline::generate(&req, &pack, &a.out, &opts)?;
    let m = &run.manifest;
    if a.json {
        print_json(&serde_json::json!({ "counts": m.counts, "entry_count": m.entry_count, "timing": run.timing }));
    } else {
        println!(
            "{} samples: {} ok, {} filtered, {} failed ({} skipped as already done) in {:.1}s",
            m.entry_count, m.counts.ok, m.counts.filtered, m.counts.failed, run.timing.skipped, run.timing.wall_clock_s
        );
    }
    let failed: Vec<_> = m.samples.iter().filter_map(|(id, e)| e.error.as_ref().map(|err| (id, err))).collect();
    for (id, err) in failed.iter().take(10) {
        eprintln!("{id}: {err}");
    }
    Ok(if failed.is_empty() { 0 } else { EXIT_VALIDATION })
}

fn read_requirements(root: &Path) -> Result<Requirements, Error> {
    let path = root.join(REQUIREMENTS_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(&path, e))
}

fn audit_cmd(a: AuditArgs) -> Result<u8, Error> {
    let report = audit::compute_report(&a.root)?;
    let mut checks = Vec::new();
    if a.verify_bias {
        let req = read_requirements(&a.root)?;
        for (lang, bias) in &req.bias {
            checks.extend(audit::verify_bias(&report, lang, bias, a.tolerance));
        }
    }
    if a.json {
        if a.verify_bias {
            print_json(&serde_json::json!({ "report": report, "bias": checks }));
        } else {
            print_json(&report);
        }
    } else {
        print!("{}", report.to_text());
        if a.verify_bias {
            println!("\nbias checks");
            for c in &checks {
                println!(
                    "{:<4} {:<12} {:<8} n={:<7} mean={:.3} expected={:.3} tol={:.3} {:?}",
                    c.language, c.origin, c.gender, c.count, c.mean, c.expected, c.tolerance, c.outcome
                );
            }
        }
    }
    let bad = !report.corrupt.is_empty() || checks.iter().any(|c| c.outcome == BiasOutcome::Fail);
    Ok(if a.strict && bad { EXIT_VALIDATION } else { 0 })
}

fn split(a: SplitArgs) -> Result<u8, Error> {
    let spec = SplitSpec {
        language: a.language,
        train_schools: a.train,
        test_schools: a.test,
        val_fraction: a.val_fraction,
        test_layouts: a.test_layouts.to_uppercase().chars().filter(|c| c.is_ascii_alphabetic()).collect(),
        physical: a.physical,
    };
    let m = audit::export_split(&a.root, &spec, a.seed, &a.out)?;
    if a.json {
        print_json(&serde_json::json!({
            "train": m.train.len(),
            "val": m.val.len(),
            "test": m.test.len(),
            "out": a.out,
        }));
    } else {
        println!("train {} / val {} / test {} -> {}", m.train.len(), m.val.len(), m.test.len(), a.out.display());
    }
    Ok(0)
}

fn validate(a: ValidateArgs) -> Result<u8, Error> {
    let v = audit::validate_tree(&a.root, &LabelVocabulary::bundled())?;
    if a.json {
        print_json(&v);
    } else {
        println!(
            "{} label files, {} violations in {} files, {} corrupt",
            v.label_files,
            v.violation_count(),
            v.violations.len(),
            v.corrupt.len()
        );
        for f in v.violations.iter().take(20) {
            println!("  {}: {:?}", f.path.display(), f.violations);
        }
        for issue in &v.manifest_issues {
            println!("  manifest: {issue}");
        }
    }
    Ok(if a.strict && !v.is_clean() { EXIT_VALIDATION } else { 0 })
}

fn evidence(a: EvidenceArgs) -> Result<u8, Error> {
    let tree = if a.physical { Tree::Physical } else { Tree::Digital };
    let base = a.root.join(tree.as_str());
    let label = find_label(&base, &a.sample_id)
        .ok_or_else(|| Error::io(base.join(&a.sample_id), std::io::Error::from(std::io::ErrorKind::NotFound)))?;
    let school = label.parent().and_then(Path::parent).expect("labels/ sits in a school directory");
    let text = std::fs::read_to_string(&label).map_err(|e| Error::io(&label, e))?;
    let doc = AnnotationDoc::from_json(&text)?;
    let image_path = school.join("images").join(format!("{}.png", a.sample_id));
    let img = image::open(&image_path).map_err(|e| Error::image(&image_path, e))?.into_rgb8();
    let out = a.out.unwrap_or_else(|| school.join("evidence").join(format!("{}.png", a.sample_id)));
    pipeline::write_png(&out, &render_evidence(&img, &doc))?;
    println!("{}", out.display());
    Ok(0)
}

fn find_label(base: &Path, id: &str) -> Option<PathBuf> {
    for lang in std::fs::read_dir(base).ok()?.flatten() {
        for school in std::fs::read_dir(lang.path()).ok()?.flatten() {
            let p = school.path().join("labels").join(format!("{id}.json"));
            if p.exists() {
                return Some(p);
            }
        }
    }
    None
}
