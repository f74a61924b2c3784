//! Samples, datasets, label manifests and the synthetic lesion-like generator.

mod manifest;
pub mod netpbm;
mod synth;

use std::path::PathBuf;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::Tensor;

pub use manifest::{load_manifest, load_unlabeled, manifest_codes, write_manifest, IssueKind, ManifestIssue};
pub use netpbm::{load_image, ImageError};
pub use synth::{generate_synthetic, render_template, SynthConfig, SHAPE_KINDS};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("manifest header: {0}")]
    Header(String),
    #[error("manifest has {} invalid row(s):\n{}", .0.len(), format_issues(.0))]
    Rows(Vec<ManifestIssue>),
    #[error("image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: ImageError,
    },
    #[error("sample {id}: image shape {actual:?} differs from {expected:?}")]
    ShapeMismatch {
        id: String,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("sample {id}: label {label} out of range for {classes} classes")]
    LabelOutOfRange { id: String, label: usize, classes: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocab(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_issues(issues: &[ManifestIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Ordered class codes with display names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassVocab {
    codes: Vec<String>,
    names: Vec<String>,
}

impl Default for ClassVocab {
    /// The seven skin-lesion categories in ground-truth column order.
    fn default() -> Self {
        let pairs = [
            ("MEL", "melanoma"),
            ("NV", "melanocytic nevus"),
            ("BCC", "basal cell carcinoma"),
            ("AKIEC", "actinic keratosis / intraepithelial carcinoma"),
            ("BKL", "benign keratosis"),
            ("DF", "dermatofibroma"),
            ("VASC", "vascular lesion"),
        ];
        ClassVocab {
            codes: pairs.iter().map(|p| p.0.to_string()).collect(),
            names: pairs.iter().map(|p| p.1.to_string()).collect(),
        }
    }
}

impl ClassVocab {
    pub fn new(codes: Vec<String>, names: Vec<String>) -> Result<Self, DataError> {
        if codes.len() < 2 {
            return Err(DataError::InvalidVocab("need at least 2 classes".into()));
        }
        if names.len() != codes.len() {
            return Err(DataError::InvalidVocab(format!(
                "{} codes but {} names",
                codes.len(),
                names.len()
            )));
        }
        for (i, c) in codes.iter().enumerate() {
            if c.is_empty() || c == "image" || c.contains(',') {
                return Err(DataError::InvalidVocab(format!("invalid code {c:?}")));
            }
            if codes[..i].contains(c) {
                return Err(DataError::InvalidVocab(format!("duplicate code {c}")));
            }
        }
        Ok(ClassVocab { codes, names })
    }

    pub fn from_codes(codes: &[&str]) -> Result<Self, DataError> {
        let codes: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
        let names = codes.clone();
        Self::new(codes, names)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn code(&self, class: usize) -> &str {
        &self.codes[class]
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.codes.iter().position(|c| c == code)
    }
}

/// One labelled image. `image` is `[C, H, W]` with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub image: Tensor,
    pub label: usize,
}

impl Sample {
    pub fn one_hot(&self, num_classes: usize) -> Tensor {
        let mut t = Tensor::zeros(&[num_classes]);
        t.data_mut()[self.label] = 1.0;
        t
    }
}

/// Sample ids paired with their true class indices, in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub ids: Vec<String>,
    pub classes: Vec<usize>,
}

impl Labels {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// An ordered multiset of samples drawn from a shared store.
///
/// Subsets and duplicated sets share the underlying images.
#[derive(Debug, Clone)]
pub struct Dataset {
    store: Arc<Vec<Sample>>,
    order: Vec<usize>,
    vocab: ClassVocab,
}

impl Dataset {
    /// Builds a dataset in the given order. All images must share one
    /// shape and every label must index into `vocab`.
    pub fn new(samples: Vec<Sample>, vocab: ClassVocab) -> Result<Self, DataError> {
        if let Some(first) = samples.first() {
            let shape = first.image.shape();
            for s in &samples {
                if s.image.shape() != shape {
                    return Err(DataError::ShapeMismatch {
                        id: s.id.clone(),
                        expected: shape.to_vec(),
                        actual: s.image.shape().to_vec(),
                    });
                }
                if s.label >= vocab.len() {
                    return Err(DataError::LabelOutOfRange {
                        id: s.id.clone(),
                        label: s.label,
                        classes: vocab.len(),
                    });
                }
            }
        }
        let order = (0..samples.len()).collect();
        Ok(Dataset {
            store: Arc::new(samples),
            order,
            vocab,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn vocab(&self) -> &ClassVocab {
        &self.vocab
    }

    pub fn num_classes(&self) -> usize {
        self.vocab.len()
    }

    pub fn get(&self, pos: usize) -> &Sample {
        &self.store[self.order[pos]]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Sample> + '_ {
        self.order.iter().map(move |&i| &self.store[i])
    }

    /// Shape shared by every image, `None` when empty.
    pub fn image_shape(&self) -> Option<&[usize]> {
        self.order.first().map(|&i| self.store[i].image.shape())
    }

    pub fn ids(&self) -> Vec<String> {
        self.iter().map(|s| s.id.clone()).collect()
    }

    pub fn labels(&self) -> Labels {
        Labels {
            ids: self.ids(),
            classes: self.iter().map(|s| s.label).collect(),
        }
    }

    /// A new dataset listing the samples at `positions` (indices into this
    /// dataset's order); positions may repeat.
    ///
    /// Panics if a position is out of range.
    pub fn subset(&self, positions: &[usize]) -> Dataset {
        Dataset {
            store: Arc::clone(&self.store),
            order: positions.iter().map(|&p| self.order[p]).collect(),
            vocab: self.vocab.clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for s in self.iter() {
            counts[s.label] += 1;
        }
        counts
    }
}

/// Stratified train/validation/test split.
///
/// Each class's members are shuffled with a seeded generator and cut into
/// contiguous runs sized `round(n * fraction)`; the test split takes the
/// remainder. Within each split, samples keep their original relative order.
pub fn split(
    dataset: &Dataset,
    fractions: [f64; 3],
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset), DataError> {
    if fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(DataError::InvalidConfig(format!(
            "split fractions must be non-negative, got {fractions:?}"
        )));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(DataError::InvalidConfig(format!(
            "split fractions must sum to 1, got {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: [Vec<usize>; 3] = Default::default();
    for class in 0..dataset.num_classes() {
        let mut members: Vec<usize> = (0..dataset.len())
            .filter(|&p| dataset.get(p).label == class)
            .collect();
        members.shuffle(&mut rng);
        let n = members.len();
        let n_train = ((n as f64 * fractions[0]).round() as usize).min(n);
        let n_val = ((n as f64 * fractions[1]).round() as usize).min(n - n_train);
        parts[0].extend_from_slice(&members[..n_train]);
        parts[1].extend_from_slice(&members[n_train..n_train + n_val]);
        parts[2].extend_from_slice(&members[n_train + n_val..]);
    }
    let [mut train, mut val, mut test] = parts;
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok((
        dataset.subset(&train),
        dataset.subset(&val),
        dataset.subset(&test),
    ))
}
