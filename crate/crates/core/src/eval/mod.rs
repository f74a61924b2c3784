//! One-vs-rest ROC curves, AUC and summary metrics.
//!
//! The trapezoid area and the Mann–Whitney statistic are both computed from
//! integer pair counts and divided once, so they agree bit-for-bit on the
//! same input.

mod export;

use serde::Serialize;
use thiserror::Error;

use crate::data::Labels;
use crate::scores::ScoreMatrix;

pub use export::{metrics_json, roc_csv, roc_svg, MetricsFile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("ROC undefined for class {class}: {reason}")]
    UndefinedCurve { class: usize, reason: String },
    #[error("empty input")]
    Empty,
    #[error("non-finite score at position {0}")]
    NonFinite(usize),
    #[error("{0}")]
    Misaligned(String),
    #[error("class index {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Points run from `(0, 0)` at threshold `+inf` to `(1, 1)` at the lowest
/// score, with one point per distinct score.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub class_index: usize,
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

fn positives_for(labels: &[usize], class: usize) -> Vec<bool> {
    labels.iter().map(|&l| l == class).collect()
}

fn check_binary(column: &[f64], positive: &[bool], class: usize) -> Result<(u64, u64), EvalError> {
    if column.len() != positive.len() {
        return Err(EvalError::Misaligned(format!(
            "{} scores but {} labels",
            column.len(),
            positive.len()
        )));
    }
    if let Some(i) = column.iter().position(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite(i));
    }
    let p = positive.iter().filter(|&&b| b).count() as u64;
    let n = positive.len() as u64 - p;
    if p == 0 {
        return Err(EvalError::UndefinedCurve { class, reason: "no positive samples".into() });
    }
    if n == 0 {
        return Err(EvalError::UndefinedCurve { class, reason: "no negative samples".into() });
    }
    Ok((p, n))
}

/// ROC curve for a binary problem given one score per sample and its
/// positive flag. `class` is only recorded on the result and in errors.
///
/// Samples with equal scores cross the threshold together.
pub fn roc_from_column(column: &[f64], positive: &[bool], class: usize) -> Result<RocCurve, EvalError> {
    let (p, n) = check_binary(column, positive, class)?;
    let mut order: Vec<usize> = (0..column.len()).collect();
    order.sort_by(|&a, &b| column[b].total_cmp(&column[a]));

    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0u64, 0u64);
    // twice the area under the step-free curve, in units of 1 / (P * N)
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let threshold = column[order[i]];
        let (tp_prev, fp_prev) = (tp, fp);
        while i < order.len() && column[order[i]] == threshold {
            if positive[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += (fp - fp_prev) as u128 * (tp + tp_prev) as u128;
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / n as f64,
            tpr: tp as f64 / p as f64,
        });
    }
    Ok(RocCurve {
        class_index: class,
        points,
        auc: area2 as f64 / (2 * p as u128 * n as u128) as f64,
    })
}

/// One-vs-rest ROC curve for `class` over a score matrix.
pub fn roc_curve(scores: &ScoreMatrix, labels: &Labels, class: usize) -> Result<RocCurve, EvalError> {
    check_labels(scores, labels)?;
    if class >= scores.num_classes() {
        return Err(EvalError::ClassOutOfRange { class, classes: scores.num_classes() });
    }
    roc_from_column(&scores.column(class), &positives_for(&labels.classes, class), class)
}

/// Mann–Whitney AUC over explicit positive flags: the fraction of
/// positive/negative pairs where the positive scores higher, ties counting
/// one half.
pub fn auc_pairwise(column: &[f64], positive: &[bool]) -> Result<f64, EvalError> {
    let (p, n) = check_binary(column, positive, 0)?;
    let pos: Vec<f64> = column.iter().zip(positive).filter(|(_, &b)| b).map(|(&v, _)| v).collect();
    let neg: Vec<f64> = column.iter().zip(positive).filter(|(_, &b)| !b).map(|(&v, _)| v).collect();
    // 2 * (#greater + 0.5 * #equal)
    let mut twice: u128 = 0;
    for &a in &pos {
        for &b in &neg {
            if a > b {
                twice += 2;
            } else if a == b {
                twice += 1;
            }
        }
    }
    Ok(twice as f64 / (2 * p as u128 * n as u128) as f64)
}

/// Mann–Whitney AUC for `class` treated as positive against all others.
pub fn auc_mann_whitney(column: &[f64], labels: &[usize], class: usize) -> Result<f64, EvalError> {
    let positive = positives_for(labels, class);
    check_binary(column, &positive, class)?;
    auc_pairwise(column, &positive)
}

fn check_labels(scores: &ScoreMatrix, labels: &Labels) -> Result<(), EvalError> {
    if scores.sample_ids() != labels.ids.as_slice() {
        return Err(EvalError::Misaligned(
            "score matrix and labels list different sample ids".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedClass {
    pub class: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    /// `None` where the class has no positives or no negatives.
    pub per_class_auc: Vec<Option<f64>>,
    pub skipped: Vec<SkippedClass>,
    /// Unweighted mean over the computable classes.
    pub macro_auc: Option<f64>,
    pub accuracy: f64,
    /// `confusion[true][predicted]`
    pub confusion: Vec<Vec<usize>>,
    pub curves: Vec<RocCurve>,
}

/// Per-class AUC, macro AUC, top-1 accuracy and the confusion matrix.
pub fn evaluate(scores: &ScoreMatrix, labels: &Labels) -> Result<EvalSummary, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::Empty);
    }
    check_labels(scores, labels)?;
    let k = scores.num_classes();
    if let Some(&class) = labels.classes.iter().find(|&&c| c >= k) {
        return Err(EvalError::ClassOutOfRange { class, classes: k });
    }
    let mut confusion = vec![vec![0usize; k]; k];
    let mut correct = 0usize;
    for (row, &truth) in scores.rows().iter().zip(&labels.classes) {
        let predicted = crate::model::argmax(row);
        confusion[truth][predicted] += 1;
        if predicted == truth {
            correct += 1;
        }
    }
    let mut per_class_auc = Vec::with_capacity(k);
    let mut skipped = Vec::new();
    let mut curves = Vec::new();
    for class in 0..k {
        match roc_curve(scores, labels, class) {
            Ok(curve) => {
                per_class_auc.push(Some(curve.auc));
                curves.push(curve);
            }
            Err(EvalError::UndefinedCurve { class, reason }) => {
                per_class_auc.push(None);
                skipped.push(SkippedClass { class, reason });
            }
            Err(e) => return Err(e),
        }
    }
    let computed: Vec<f64> = per_class_auc.iter().flatten().copied().collect();
    let macro_auc = (!computed.is_empty()).then(|| computed.iter().sum::<f64>() / computed.len() as f64);
    Ok(EvalSummary {
        per_class_auc,
        skipped,
        macro_auc,
        accuracy: correct as f64 / scores.len() as f64,
        confusion,
        curves,
    })
}

/// Re-integrates a curve's points with the trapezoid rule.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}
