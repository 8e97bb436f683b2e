use serde::{Deserialize, Serialize};

use super::{AuditError, DatasetReport, GradeGroup};
use crate::config::{BiasSpec, Gender, Language, Origin};

/// Groups with fewer grades than this are not judged.
pub const MIN_BIAS_SAMPLES: usize = 100;
/// Default tolerance, in standard errors of the group mean.
pub const DEFAULT_SE_MULTIPLIER: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasOutcome {
    Pass,
    Fail,
    InsufficientSamples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasCheck {
    pub language: String,
    pub origin: String,
    pub gender: String,
    pub count: usize,
    pub mean: f64,
    pub expected: f64,
    pub standard_error: f64,
    pub tolerance: f64,
    pub outcome: BiasOutcome,
}

/// Compares one group's empirical mean with `(μ_origin + μ_gender) / 2`.
/// `tolerance` defaults to three standard errors of the mean.
pub fn verify_group(group: &GradeGroup, bias: &BiasSpec, tolerance: Option<f64>) -> Result<BiasCheck, AuditError> {
    if group.count < MIN_BIAS_SAMPLES {
        return Err(AuditError::InsufficientSamples { group: group.name(), count: group.count, min: MIN_BIAS_SAMPLES });
    }
    let expected = expected_mean(group, bias);
    let standard_error = group.std / (group.count as f64).sqrt();
    // A zero-spread group still has rounding noise in its mean.
    let tolerance = tolerance.unwrap_or(DEFAULT_SE_MULTIPLIER * standard_error).max(1e-9);
    let pass = (group.mean - expected).abs() <= tolerance;
    Ok(BiasCheck {
        language: group.language.clone(),
        origin: group.origin.clone(),
        gender: group.gender.clone(),
        count: group.count,
        mean: group.mean,
        expected,
        standard_error,
        tolerance,
        outcome: if pass { BiasOutcome::Pass } else { BiasOutcome::Fail },
    })
}

/// Checks every grade group of `language` in the report.
pub fn verify_bias(report: &DatasetReport, language: &Language, bias: &BiasSpec, tolerance: Option<f64>) -> Vec<BiasCheck> {
    report
        .grades
        .iter()
        .filter(|g| g.language == language.as_str())
        .map(|g| {
            verify_group(g, bias, tolerance).unwrap_or_else(|_| BiasCheck {
                language: g.language.clone(),
                origin: g.origin.clone(),
                gender: g.gender.clone(),
                count: g.count,
                mean: g.mean,
                expected: expected_mean(g, bias),
                standard_error: 0.0,
                tolerance: 0.0,
                outcome: BiasOutcome::InsufficientSamples,
            })
        })
        .collect()
}

/// Combination-rule mean of a group; groups the bias spec does not cover
/// get an unreachable target so they never pass.
fn expected_mean(group: &GradeGroup, bias: &BiasSpec) -> f64 {
    let gender = Gender::ALL.into_iter().find(|g| g.as_str() == group.gender);
    gender
        .and_then(|g| bias.combined_mean(&Origin::new(group.origin.as_str()), g))
        .unwrap_or(f64::MAX)
}
