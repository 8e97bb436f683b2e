use super::*;
use crate::assets::AssetPack;
use proptest::prelude::*;

const MINIMAL: &str = r#"
format = "gradesynth-requirements/1"
master_seed = 7
languages = ["en"]
students_per_school = 20

[gender_probabilities]
female = 0.5
male = 0.5

[origin_probabilities.en]
english = 0.7
chinese = 0.3

[bias.en]
origin_grade_means = { english = 6.8, chinese = 7.6 }
gender_grade_means = { female = 6.6, male = 6.5 }

[[schools]]
name = "Pinnacle"
language = "en"
template = "pinnacle"
layout = "A_single"
pages_per_student = 3
grade_scale = "numeric_0_100"

[[schools]]
name = "Paloalto"
language = "en"
template = "paloalto"
layout = "C"
pages_per_student = 2
grade_scale = "numeric_0_100"
"#;

fn names() -> NameDatabase {
    AssetPack::bundled().load_names().unwrap()
}

fn minimal() -> Requirements {
    Requirements::from_toml_str(MINIMAL, &names()).unwrap()
}

#[test]
fn minimal_requirements_parse_with_defaults() {
    let req = minimal();
    assert_eq!(req.schools.len(), 2);
    assert_eq!(req.demography_sampling, DemographySampling::Quota);
    assert_eq!(req.bias[&Language::new("en")].grade_sigma, 2.0);
    assert_eq!(req.visual, VisualMix::default());
}

#[test]
fn header_must_come_first() {
    let moved = MINIMAL.replacen("format = \"gradesynth-requirements/1\"\n", "", 1) + "\nformat = \"gradesynth-requirements/1\"\n";
    assert!(matches!(Requirements::from_toml_str(&moved, &names()), Err(ConfigError::MalformedConfig(_))));
    let commented = format!("# leading comment\n\n{MINIMAL}");
    assert!(Requirements::from_toml_str(&commented, &names()).is_ok());
}

#[test]
fn wrong_format_version_is_rejected() {
    let text = MINIMAL.replace("requirements/1", "requirements/2");
    assert!(matches!(Requirements::from_toml_str(&text, &names()), Err(ConfigError::MalformedConfig(_))));
}

#[test]
fn probabilities_must_sum_to_one() {
    let text = MINIMAL.replace("chinese = 0.3\n", "chinese = 0.2\n");
    match Requirements::from_toml_str(&text, &names()) {
        Err(ConfigError::InvalidProbability { map, sum }) => {
            assert_eq!(map, "origin_probabilities.en");
            assert!((sum - 0.9).abs() < 1e-12);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn unknown_origin_is_rejected() {
    let text = MINIMAL.replace("chinese = 0.3\n", "martian = 0.3\n").replace("chinese = 7.6", "martian = 7.6");
    assert!(matches!(Requirements::from_toml_str(&text, &names()), Err(ConfigError::UnknownOrigin(o)) if o == "martian"));
}

#[test]
fn too_many_pages_for_layout_is_rejected() {
    let text = MINIMAL.replacen("pages_per_student = 2", "pages_per_student = 3", 1);
    assert!(matches!(Requirements::from_toml_str(&text, &names()), Err(ConfigError::Invalid(_))));
}

#[test]
fn unknown_fields_are_rejected() {
    let text = MINIMAL.replace("students_per_school = 20", "students_per_school = 20\nstudents = 3");
    assert!(matches!(Requirements::from_toml_str(&text, &names()), Err(ConfigError::MalformedConfig(_))));
}

#[test]
fn plastic_is_reserved_for_the_scanner() {
    let mut req = minimal();
    req.visual.materials.insert(BackgroundMaterial::Plastic, 0.1);
    assert!(req.validate(&names()).is_err());
}

#[test]
fn bundled_configs_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            parse_requirements(&path, &names()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn layout_levels_cover_each_level_once() {
    for layout in LayoutModel::ALL {
        let mut levels: Vec<u8> = (1..=layout.max_pages()).flat_map(|p| layout.levels_on_page(p)).collect();
        levels.sort();
        let k = layout.levels_per_page() as u8;
        let covered = MAX_LEVEL / k * k;
        assert_eq!(levels, (1..=covered).collect::<Vec<_>>(), "{layout}");
    }
    assert_eq!(LayoutModel::C.levels_on_page(2), vec![3, 4]);
    assert_eq!(LayoutModel::BThreeTables.max_pages(), 1);
}

#[test]
fn slugs_fold_accents_and_punctuation() {
    assert_eq!(slugify("Británico"), "britanico");
    assert_eq!(slugify("  St. James' High "), "st-james-high");
    assert_eq!(slugify("Liceo Español nº 5"), "liceo-espanol-n-5");
}

#[test]
fn hash_tracks_content() {
    let a = minimal();
    let mut b = a.clone();
    assert_eq!(a.hash(), b.hash());
    b.master_seed += 1;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn combined_mean_averages_origin_and_gender() {
    let req = minimal();
    let bias = &req.bias[&Language::new("en")];
    assert_eq!(bias.combined_mean(&Origin::new("chinese"), Gender::Male), Some((7.6 + 6.5) / 2.0));
    assert_eq!(bias.combined_mean(&Origin::new("indian"), Gender::Male), None);
}

#[test]
fn blueprint_enumerates_every_page() {
    let req = minimal();
    let bp = build_blueprint(&req);
    assert_eq!(bp.entries.len(), 20 * 3 + 20 * 2);
    assert_eq!(bp.meta.entry_count, bp.entries.len());
    let ids: BTreeSet<&str> = bp.entries.iter().map(|e| e.sample_id.as_str()).collect();
    assert_eq!(ids.len(), bp.entries.len());
    assert!(ids.contains("pinnacle-00019-p3"));
    assert!(ids.contains("paloalto-00000-p2"));
    // Pages of one student share demographics and the per-student seeds.
    let p1 = bp.entry("pinnacle-00004-p1").unwrap();
    let p2 = bp.entry("pinnacle-00004-p2").unwrap();
    assert_eq!((p1.gender, &p1.origin), (p2.gender, &p2.origin));
    assert_eq!(p1.seeds.grades, p2.seeds.grades);
    assert_ne!(p1.seeds.warp, p2.seeds.warp);
}

#[test]
fn blueprint_is_reproducible_and_roundtrips() {
    let req = minimal();
    let a = build_blueprint(&req);
    assert_eq!(a.to_canonical_json(), build_blueprint(&req).to_canonical_json());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blueprint.json");
    a.write(&path).unwrap();
    assert_eq!(Blueprint::read(&path).unwrap(), a);
    assert_eq!(a.meta.created, blueprint::DEFAULT_CREATED);
}

#[test]
fn quota_demographics_hit_exact_counts() {
    let req = minimal();
    let bp = build_blueprint(&req);
    for school in ["pinnacle", "paloalto"] {
        let students: Vec<_> = bp.entries.iter().filter(|e| e.school_slug == school && e.page == 1).collect();
        let count = |g: Gender, o: &str| students.iter().filter(|e| e.gender == g && e.origin.as_str() == o).count();
        // 20 students over weights 0.35/0.15/0.35/0.15 -> 7, 3, 7, 3.
        assert_eq!(count(Gender::Female, "english"), 7);
        assert_eq!(count(Gender::Female, "chinese"), 3);
        assert_eq!(count(Gender::Male, "english"), 7);
        assert_eq!(count(Gender::Male, "chinese"), 3);
    }
}

#[test]
fn visual_plans_follow_quotas() {
    let mut req = minimal();
    req.students_per_school = 200;
    let bp = build_blueprint(&req);
    let n = bp.entries.len() as f64;
    let frac = |f: &dyn Fn(&VisualPlan) -> bool| bp.entries.iter().filter(|e| f(&e.visual)).count() as f64 / n;
    assert!((frac(&|v| v.shadow) - req.visual.shadow_fraction).abs() <= 1.0 / n);
    assert!((frac(&|v| v.cloth) - req.visual.cloth_fraction).abs() <= 1.0 / n);
    assert!((frac(&|v| v.objects) - req.visual.objects_fraction).abs() <= 1.0 / n);
    for e in &bp.entries {
        assert_eq!(e.visual.style == RenderStyle::Scanner, e.visual.material == BackgroundMaterial::Plastic);
    }
}

proptest! {
    #[test]
    fn independent_sampling_is_seed_stable(seed in any::<u64>()) {
        let mut req = minimal();
        req.master_seed = seed;
        req.demography_sampling = DemographySampling::Independent;
        let a = build_blueprint(&req);
        let b = build_blueprint(&req);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn quota_counts_match_largest_remainder(students in 1u32..300, seed in any::<u64>()) {
        let mut req = minimal();
        req.students_per_school = students;
        req.master_seed = seed;
        req.schools.truncate(1);
        req.schools[0].pages_per_student = 1;
        let bp = build_blueprint(&req);
        let got: Vec<usize> = [(Gender::Female, "chinese"), (Gender::Female, "english"), (Gender::Male, "chinese"), (Gender::Male, "english")]
            .iter()
            .map(|(g, o)| bp.entries.iter().filter(|e| e.gender == *g && e.origin.as_str() == *o).count())
            .collect();
        // Cells are ordered by (gender, origin) in the BTreeMaps: chinese before english.
        let oracle = largest_remainder(&[0.5 * 0.3, 0.5 * 0.7, 0.5 * 0.3, 0.5 * 0.7], students as usize);
        prop_assert_eq!(got.iter().sum::<usize>(), students as usize);
        prop_assert_eq!(&got, &oracle);
    }
}
