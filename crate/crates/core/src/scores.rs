//! Per-sample class-probability rows.

use thiserror::Error;

/// Tolerance on each row's distance from a unit sum.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("{ids} sample ids but {rows} score rows")]
    LengthMismatch { ids: usize, rows: usize },
    #[error("row {row} has {actual} classes, expected {expected}")]
    Width { row: usize, expected: usize, actual: usize },
    #[error("row {row} is not a probability row: {reason}")]
    NotProbability { row: usize, reason: String },
}

/// `rows[i][n]` is the probability a model assigns class `n` for sample
/// `sample_ids[i]`. Every row has at least two entries, each in `[0, 1]`,
/// summing to 1 within [`ROW_SUM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    sample_ids: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ScoreMatrix {
    pub fn new(sample_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, ScoreError> {
        if sample_ids.len() != rows.len() {
            return Err(ScoreError::LengthMismatch {
                ids: sample_ids.len(),
                rows: rows.len(),
            });
        }
        let width = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(ScoreError::Width {
                    row: i,
                    expected: width,
                    actual: row.len(),
                });
            }
            check_probability_row(row).map_err(|reason| ScoreError::NotProbability { row: i, reason })?;
        }
        Ok(ScoreMatrix { sample_ids, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Zero for an empty matrix.
    pub fn num_classes(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Scores of one class across all samples.
    pub fn column(&self, class: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[class]).collect()
    }
}

pub(crate) fn check_probability_row(row: &[f64]) -> Result<(), String> {
    if row.len() < 2 {
        return Err(format!("needs at least 2 entries, has {}", row.len()));
    }
    if let Some(v) = row.iter().find(|v| !(v.is_finite() && (0.0..=1.0).contains(*v))) {
        return Err(format!("entry {v} outside [0, 1]"));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(format!("sums to {sum}"));
    }
    Ok(())
}
