//! Detection scoring against ground truth.
//!
//! A finding is a true positive when its `(vuln_class, location)` pair exactly
//! matches an unmatched label. Matching is one-to-one and greedy in finding
//! order, so a duplicate finding for an already-matched label counts as a
//! false positive.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::fixture::{GroundTruth, Label};
use crate::report::Finding;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("findings are for {findings} but ground truth is for {truth}")]
    TargetMismatch { findings: String, truth: String },
}

const SCALE: u64 = 10_000;

/// A ratio in ten-thousandths, or undefined when its denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    Defined(u32),
    Undefined,
}

impl Ratio {
    /// `num / den` rounded half-up to ten-thousandths.
    pub fn from_fraction(num: u64, den: u64) -> Self {
        if den == 0 {
            return Ratio::Undefined;
        }
        let scaled = (2 * num * SCALE + den) / (2 * den);
        Ratio::Defined(scaled as u32)
    }

    pub fn ten_thousandths(&self) -> Option<u32> {
        match self {
            Ratio::Defined(v) => Some(*v),
            Ratio::Undefined => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        self.ten_thousandths().map(|v| v as f64 / SCALE as f64)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Defined(v) => write!(f, "{}.{:04}", v / 10_000, v % 10_000),
            Ratio::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    #[serde(flatten)]
    pub counts: Counts,
    pub precision: Ratio,
    pub recall: Ratio,
    pub f1: Ratio,
}

impl DetectionMetrics {
    pub fn from_counts(counts: Counts) -> Self {
        let Counts { tp, fp, fn_ } = counts;
        let precision = Ratio::from_fraction(tp, tp + fp);
        let recall = Ratio::from_fraction(tp, tp + fn_);
        // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn) whenever it is defined, which
        // requires both ratios defined and tp > 0.
        let f1 = match (precision, recall) {
            (Ratio::Defined(_), Ratio::Defined(_)) if tp > 0 => {
                Ratio::from_fraction(2 * tp, 2 * tp + fp + fn_)
            }
            _ => Ratio::Undefined,
        };
        Self { counts, precision, recall, f1 }
    }
}

/// Harmonic mean of real-valued precision and recall.
pub fn f1_from(precision: f64, recall: f64) -> Option<f64> {
    let sum = precision + recall;
    (sum > 0.0).then(|| 2.0 * precision * recall / sum)
}

/// Score `findings` produced for `target_id` against `truth`.
pub fn score_detections(
    target_id: &str,
    findings: &[Finding],
    truth: &GroundTruth,
) -> Result<DetectionMetrics, MetricsError> {
    Ok(DetectionMetrics::from_counts(count_matches(target_id, findings, truth)?))
}

pub fn count_matches(
    target_id: &str,
    findings: &[Finding],
    truth: &GroundTruth,
) -> Result<Counts, MetricsError> {
    if target_id != truth.target_id {
        return Err(MetricsError::TargetMismatch {
            findings: target_id.to_owned(),
            truth: truth.target_id.clone(),
        });
    }
    let mut unmatched: BTreeSet<Label> = truth.labels.clone();
    let mut counts = Counts::default();
    for f in findings {
        let key = Label { vuln_class: f.vuln_class, location: f.location.clone() };
        if unmatched.remove(&key) {
            counts.tp += 1;
        } else {
            counts.fp += 1;
        }
    }
    counts.fn_ = unmatched.len() as u64;
    Ok(counts)
}
