use serde::{Deserialize, Serialize};

use super::field::WarpField;
use super::remap::Remapped;
use super::{SHEET_HEIGHT_M, SHEET_WIDTH_M};

/// Largest tolerated surface slope (rise over run) of the height field.
pub const MAX_FOLD_SLOPE: f64 = 0.5;
/// Grid spacing at which the slope is evaluated.
pub const FOLD_PROBE_STEP_M: f64 = 0.005;
/// A sample is rejected when more than 1/50 of its words touch the frame edge.
pub const MAX_CLIPPED_WORDS: (usize, usize) = (1, 50);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterReason {
    ClippedWords,
    ExcessiveFolds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validity {
    pub valid: bool,
    pub reasons: Vec<FilterReason>,
    pub clipped_words: usize,
    pub total_words: usize,
    pub max_slope: f64,
}

/// Rejects samples with words cut by the frame or folds too steep to read.
/// Exactly 2% clipped words is still valid.
pub fn filter_validity(remapped: &Remapped, field: &WarpField<f64>) -> Validity {
    let max_slope = field.max_slope(SHEET_WIDTH_M, SHEET_HEIGHT_M, FOLD_PROBE_STEP_M);
    let mut reasons = Vec::new();
    let (num, den) = MAX_CLIPPED_WORDS;
    if remapped.clipped_words * den > remapped.total_words * num {
        reasons.push(FilterReason::ClippedWords);
    }
    if max_slope > MAX_FOLD_SLOPE {
        reasons.push(FilterReason::ExcessiveFolds);
    }
    Validity {
        valid: reasons.is_empty(),
        reasons,
        clipped_words: remapped.clipped_words,
        total_words: remapped.total_words,
        max_slope,
    }
}
