//! Ground-truth style label manifests: `image,<CODE>,<CODE>,...` with one
//! `0`/`1` cell per class.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{netpbm, ClassVocab, DataError, Dataset, Sample};
use crate::tensor::Tensor;

/// A problem with a single manifest row. `row` counts data rows from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestIssue {
    pub row: usize,
    pub kind: IssueKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IssueKind {
    MultiHot,
    NoLabel,
    BadValue { column: String, value: String },
    FieldCount { expected: usize, actual: usize },
    MissingImage { path: PathBuf },
    Image { path: PathBuf, message: String },
}

impl fmt::Display for ManifestIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = self.row;
        match &self.kind {
            IssueKind::MultiHot => write!(f, "multi-hot at row {row}"),
            IssueKind::NoLabel => write!(f, "no label at row {row}"),
            IssueKind::BadValue { column, value } => {
                write!(f, "invalid value {value:?} in column {column} at row {row}")
            }
            IssueKind::FieldCount { expected, actual } => {
                write!(f, "expected {expected} fields, found {actual} at row {row}")
            }
            IssueKind::MissingImage { path } => {
                write!(f, "missing image {} at row {row}", path.display())
            }
            IssueKind::Image { path, message } => {
                write!(f, "unreadable image {} at row {row}: {message}", path.display())
            }
        }
    }
}

/// Class-code columns of a manifest header, in file order.
pub fn manifest_codes(csv_path: &Path) -> Result<Vec<String>, DataError> {
    let mut reader = csv::ReaderBuilder::new().from_path(csv_path)?;
    let header = reader.headers()?.clone();
    check_image_column(&header)?;
    Ok(header.iter().skip(1).map(str::to_string).collect())
}

fn check_image_column(header: &csv::StringRecord) -> Result<(), DataError> {
    match header.get(0) {
        Some("image") => Ok(()),
        Some(other) => Err(DataError::Header(format!(
            "first column must be \"image\", found {other:?}"
        ))),
        None => Err(DataError::Header("empty header".into())),
    }
}

/// Maps each class column to its vocabulary index.
fn class_columns(
    header: &csv::StringRecord,
    vocab: &ClassVocab,
    require_all: bool,
) -> Result<Vec<usize>, DataError> {
    check_image_column(header)?;
    let mut columns = Vec::new();
    for name in header.iter().skip(1) {
        let idx = vocab
            .index_of(name)
            .ok_or_else(|| DataError::Header(format!("unknown column {name:?}")))?;
        if columns.contains(&idx) {
            return Err(DataError::Header(format!("duplicate column {name:?}")));
        }
        columns.push(idx);
    }
    if require_all || !columns.is_empty() {
        if let Some(missing) = vocab
            .codes()
            .iter()
            .enumerate()
            .find(|(i, _)| !columns.contains(i))
        {
            return Err(DataError::Header(format!("missing column {:?}", missing.1)));
        }
    }
    Ok(columns)
}

struct Row {
    number: usize,
    image: String,
    label: Option<usize>,
}

fn parse_rows(
    csv_path: &Path,
    vocab: &ClassVocab,
    require_labels: bool,
) -> Result<(Vec<Row>, Vec<ManifestIssue>), DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(csv_path)?;
    let header = reader.headers()?.clone();
    let columns = class_columns(&header, vocab, require_labels)?;
    let mut rows = Vec::new();
    let mut issues = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != header.len() {
            issues.push(ManifestIssue {
                row,
                kind: IssueKind::FieldCount {
                    expected: header.len(),
                    actual: record.len(),
                },
            });
            continue;
        }
        let mut hot = Vec::new();
        let mut bad = false;
        for (col, cell) in columns.iter().zip(record.iter().skip(1)) {
            match cell.trim().parse::<f64>() {
                Ok(v) if v == 1.0 => hot.push(*col),
                Ok(v) if v == 0.0 => {}
                _ => {
                    bad = true;
                    issues.push(ManifestIssue {
                        row,
                        kind: IssueKind::BadValue {
                            column: vocab.code(*col).to_string(),
                            value: cell.to_string(),
                        },
                    });
                }
            }
        }
        if bad {
            continue;
        }
        let label = match hot.len() {
            0 if columns.is_empty() => None,
            0 => {
                issues.push(ManifestIssue { row, kind: IssueKind::NoLabel });
                continue;
            }
            1 => Some(hot[0]),
            _ => {
                issues.push(ManifestIssue { row, kind: IssueKind::MultiHot });
                continue;
            }
        };
        rows.push(Row {
            number: row,
            image: record[0].to_string(),
            label,
        });
    }
    Ok((rows, issues))
}

fn image_path(image_dir: &Path, image: &str) -> Option<PathBuf> {
    ["pgm", "ppm"]
        .iter()
        .map(|ext| image_dir.join(format!("{image}.{ext}")))
        .find(|p| p.is_file())
}

/// Loads every row's image in parallel, returning them in manifest order.
fn load_images(rows: &[Row], image_dir: &Path) -> Vec<Result<Tensor, ManifestIssue>> {
    rows.par_iter()
        .map(|r| {
            let (row, image) = (r.number, r.image.as_str());
            let path = image_path(image_dir, image).ok_or_else(|| ManifestIssue {
                row,
                kind: IssueKind::MissingImage {
                    path: image_dir.join(format!("{image}.pgm")),
                },
            })?;
            netpbm::load_image(&path).map_err(|e| ManifestIssue {
                row,
                kind: IssueKind::Image {
                    path: path.clone(),
                    message: e.to_string(),
                },
            })
        })
        .collect()
}

/// Loads a labelled manifest. Every row resolves `<image_dir>/<image>.pgm`
/// (or `.ppm`) and must carry exactly one `1` among the class columns.
///
/// Row-level problems are collected and reported together; no dataset is
/// returned if any row fails.
pub fn load_manifest(
    csv_path: &Path,
    image_dir: &Path,
    vocab: &ClassVocab,
) -> Result<Dataset, DataError> {
    let (rows, mut issues) = parse_rows(csv_path, vocab, true)?;
    let images = load_images(&rows, image_dir);
    let mut samples = Vec::with_capacity(rows.len());
    for (row, image) in rows.into_iter().zip(images) {
        match image {
            Ok(t) => samples.push(Sample {
                id: row.image,
                image: t,
                label: row.label.expect("labels required"),
            }),
            Err(issue) => issues.push(issue),
        }
    }
    if !issues.is_empty() {
        issues.sort_by_key(|i| i.row);
        return Err(DataError::Rows(issues));
    }
    Dataset::new(samples, vocab.clone())
}

/// Loads images named by a manifest whose class columns are optional.
/// Returns `(id, image)` pairs in manifest order.
pub fn load_unlabeled(
    csv_path: &Path,
    image_dir: &Path,
    vocab: &ClassVocab,
) -> Result<Vec<(String, Tensor)>, DataError> {
    let (rows, mut issues) = parse_rows(csv_path, vocab, false)?;
    let images = load_images(&rows, image_dir);
    let mut out = Vec::with_capacity(rows.len());
    for (row, image) in rows.into_iter().zip(images) {
        match image {
            Ok(t) => out.push((row.image, t)),
            Err(issue) => issues.push(issue),
        }
    }
    if !issues.is_empty() {
        issues.sort_by_key(|i| i.row);
        return Err(DataError::Rows(issues));
    }
    if let Some((_, first)) = out.first() {
        let shape = first.shape().to_vec();
        if let Some((bad, t)) = out.iter().find(|(_, t)| t.shape() != shape.as_slice()) {
            return Err(DataError::ShapeMismatch {
                id: bad.clone(),
                expected: shape,
                actual: t.shape().to_vec(),
            });
        }
    }
    Ok(out)
}

/// Writes `image,<codes...>` followed by one `0`/`1` row per sample.
pub fn write_manifest(path: &Path, dataset: &Dataset) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["image".to_string()];
    header.extend(dataset.vocab().codes().iter().cloned());
    writer.write_record(&header)?;
    for s in dataset.iter() {
        let mut record = vec![s.id.clone()];
        record.extend((0..dataset.num_classes()).map(|c| if c == s.label { "1" } else { "0" }.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
