//! Multiple-CNN ensemble trained with additive hard-sample selection.
//!
//! Each member after the first starts from its predecessor's weights and is
//! trained on the samples the predecessor scored below a confidence
//! threshold (optionally together with the ones it misclassified).
//! Prediction picks, per sample, the single (model, class) pair with the
//! highest probability across all members.

mod store;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ClassVocab, Dataset, Labels};
use crate::model::{Model, ModelConfig, ModelError, TrainReport};
use crate::optim::SgdConfig;
use crate::scores::{check_probability_row, ScoreMatrix};
use crate::tensor::Tensor;

pub use store::{model_file_name, ENSEMBLE_MANIFEST};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("sample misalignment at position {position}: expected id {expected:?}, found {found:?}")]
    Misaligned {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("{0}")]
    LengthMismatch(String),
    #[error("invalid score row: {0}")]
    InvalidRow(String),
    #[error("invalid ensemble config: {0}")]
    InvalidConfig(String),
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("no models to fuse")]
    NoModels,
    #[error("ensemble directory: {0}")]
    Format(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("ensemble.json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which samples a round hands to the next model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPredicate {
    /// top score below the threshold
    ScoreOnly,
    /// top score below the threshold, or predicted class wrong
    ScoreOrWrong,
}

/// How the next model's training set is assembled from a selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NextSetMode {
    /// only the selected samples, once each
    HardOnly,
    /// every sample once, selected samples a second time
    FullPlusDuplicates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    /// Confidence threshold; a sample whose top score is below it is hard.
    pub threshold: f64,
    pub max_models: usize,
    pub selection_predicate: SelectionPredicate,
    pub next_set_mode: NextSetMode,
    /// Training stops when fewer samples than this are selected.
    pub min_hard_set: usize,
    pub epochs_first: usize,
    pub epochs_rest: usize,
    pub batch_size: usize,
    pub sgd: SgdConfig,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            threshold: 0.9,
            max_models: 5,
            selection_predicate: SelectionPredicate::ScoreOrWrong,
            next_set_mode: NextSetMode::HardOnly,
            min_hard_set: 8,
            epochs_first: 5,
            epochs_rest: 10,
            batch_size: 16,
            sgd: SgdConfig::default(),
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<(), EnsembleError> {
        let bad = |m: String| Err(EnsembleError::InvalidConfig(m));
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return bad(format!("threshold must be in (0, 1], got {}", self.threshold));
        }
        if self.max_models == 0 {
            return bad("max_models must be >= 1".into());
        }
        if self.epochs_first == 0 || self.epochs_rest == 0 {
            return bad("epochs_first and epochs_rest must be >= 1".into());
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        self.sgd
            .validate()
            .map_err(|e| EnsembleError::InvalidConfig(e.to_string()))
    }
}

/// Highest probability in a row and its class index (lowest index on ties).
pub fn top_score(row: &[f64]) -> Result<(f64, usize), EnsembleError> {
    check_probability_row(row).map_err(EnsembleError::InvalidRow)?;
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    Ok((row[best], best))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionEntry {
    pub id: String,
    pub top_score: f64,
    pub predicted: usize,
    pub true_class: usize,
    pub selected: bool,
}

/// Per-sample outcome of one selection round, in scored order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub threshold: f64,
    pub predicate: SelectionPredicate,
    pub entries: Vec<SelectionEntry>,
}

impl SelectionReport {
    pub fn selected_count(&self) -> usize {
        self.entries.iter().filter(|e| e.selected).count()
    }

    pub fn selected_ids(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.selected)
            .map(|e| e.id.as_str())
            .collect()
    }

    /// Mean top score over all entries; 0 for an empty report.
    pub fn mean_top_score(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        self.entries.iter().map(|e| e.top_score).sum::<f64>() / self.entries.len() as f64
    }
}

/// The selection predicate applied to a single sample.
pub fn is_selected(
    predicate: SelectionPredicate,
    threshold: f64,
    top_score: f64,
    predicted: usize,
    true_class: usize,
) -> bool {
    let unconfident = top_score < threshold;
    match predicate {
        SelectionPredicate::ScoreOnly => unconfident,
        SelectionPredicate::ScoreOrWrong => unconfident || predicted != true_class,
    }
}

fn check_aligned(expected: &[String], found: &[String]) -> Result<(), EnsembleError> {
    if expected.len() != found.len() {
        return Err(EnsembleError::LengthMismatch(format!(
            "{} samples vs {} samples",
            expected.len(),
            found.len()
        )));
    }
    if let Some(position) = expected.iter().zip(found).position(|(a, b)| a != b) {
        return Err(EnsembleError::Misaligned {
            position,
            expected: expected[position].clone(),
            found: found[position].clone(),
        });
    }
    Ok(())
}

/// Marks the hard samples of one round: those whose top score falls below
/// `cfg.threshold`, plus the misclassified ones under
/// [`SelectionPredicate::ScoreOrWrong`].
pub fn select_additive_samples(
    scores: &ScoreMatrix,
    labels: &Labels,
    cfg: &EnsembleConfig,
) -> Result<SelectionReport, EnsembleError> {
    check_aligned(&labels.ids, scores.sample_ids())?;
    let k = scores.num_classes();
    let entries = scores
        .rows()
        .iter()
        .zip(labels.ids.iter().zip(&labels.classes))
        .map(|(row, (id, &true_class))| {
            if true_class >= k {
                return Err(EnsembleError::InvalidRow(format!(
                    "sample {id} has class {true_class} but scores have {k} classes"
                )));
            }
            let (score, predicted) = top_score(row)?;
            Ok(SelectionEntry {
                id: id.clone(),
                top_score: score,
                predicted,
                true_class,
                selected: is_selected(cfg.selection_predicate, cfg.threshold, score, predicted, true_class),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(SelectionReport {
        threshold: cfg.threshold,
        predicate: cfg.selection_predicate,
        entries,
    })
}

/// Training set for the next model, built from a report over `full_set`.
pub fn build_next_training_set(
    report: &SelectionReport,
    full_set: &Dataset,
    mode: NextSetMode,
) -> Result<Dataset, EnsembleError> {
    let report_ids: Vec<String> = report.entries.iter().map(|e| e.id.clone()).collect();
    check_aligned(&full_set.ids(), &report_ids)?;
    let selected = report
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.selected)
        .map(|(i, _)| i);
    let positions: Vec<usize> = match mode {
        NextSetMode::HardOnly => selected.collect(),
        NextSetMode::FullPlusDuplicates => (0..full_set.len()).chain(selected).collect(),
    };
    Ok(full_set.subset(&positions))
}

/// What the ensemble loop needs from a member model.
pub trait Classifier: Sized {
    fn fit(
        &mut self,
        data: &Dataset,
        epochs: usize,
        batch_size: usize,
        sgd: &SgdConfig,
        seed: u64,
    ) -> Result<TrainReport, ModelError>;

    fn predict_scores(&self, data: &Dataset) -> Result<ScoreMatrix, ModelError>;

    /// The starting point for the next member.
    fn warm_start(&self) -> Self;
}

impl Classifier for Model {
    fn fit(
        &mut self,
        data: &Dataset,
        epochs: usize,
        batch_size: usize,
        sgd: &SgdConfig,
        seed: u64,
    ) -> Result<TrainReport, ModelError> {
        self.train(data, epochs, batch_size, sgd, seed)
    }

    fn predict_scores(&self, data: &Dataset) -> Result<ScoreMatrix, ModelError> {
        Model::predict_scores(self, data)
    }

    fn warm_start(&self) -> Self {
        Model::warm_start(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelProvenance {
    /// Training multiset, in training-set order.
    pub train_ids: Vec<String>,
    pub epochs: usize,
    /// 1-based round whose selection produced this model's training set;
    /// `None` for the first model.
    pub source_round: Option<usize>,
    pub train_report: TrainReport,
}

/// Scoring of the full training set by model `round` and the resulting selection.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRound {
    /// 1-based index of the model that was scored.
    pub round: usize,
    /// Size of that model's training set.
    pub train_size: usize,
    pub report: SelectionReport,
}

#[derive(Debug, Clone)]
pub struct Ensemble<C = Model> {
    pub config: EnsembleConfig,
    pub vocab: ClassVocab,
    pub seed: u64,
    pub models: Vec<C>,
    pub provenance: Vec<ModelProvenance>,
    pub rounds: Vec<SelectionRound>,
}

/// Training seed for the `index`-th (1-based) member.
pub fn member_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Builds the first model from `model_cfg` and runs the additive loop.
pub fn train_mcnn(
    train_set: &Dataset,
    model_cfg: &ModelConfig,
    cfg: &EnsembleConfig,
    seed: u64,
) -> Result<Ensemble<Model>, EnsembleError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(EnsembleError::EmptyTrainSet);
    }
    let first = Model::build(model_cfg)?;
    train_ensemble(first, train_set, cfg, seed)
}

/// The additive training loop over any [`Classifier`].
///
/// 1. Train `initial` on the full set for `epochs_first` epochs.
/// 2. Score the full set with the newest model and select hard samples.
/// 3. Stop if the model cap is reached or fewer than `max(1, min_hard_set)`
///    samples were selected.
/// 4. Otherwise warm-start the next model, train it on the set built from
///    the selection for `epochs_rest` epochs, and go to 2.
pub fn train_ensemble<C: Classifier>(
    initial: C,
    train_set: &Dataset,
    cfg: &EnsembleConfig,
    seed: u64,
) -> Result<Ensemble<C>, EnsembleError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(EnsembleError::EmptyTrainSet);
    }
    let labels = train_set.labels();
    let mut models = Vec::new();
    let mut provenance = Vec::new();
    let mut rounds: Vec<SelectionRound> = Vec::new();

    let mut current = initial;
    let mut current_set = train_set.clone();
    let mut epochs = cfg.epochs_first;
    let mut source_round = None;
    loop {
        let index = models.len() + 1;
        let train_report = current.fit(&current_set, epochs, cfg.batch_size, &cfg.sgd, member_seed(seed, index))?;
        provenance.push(ModelProvenance {
            train_ids: current_set.ids(),
            epochs,
            source_round,
            train_report,
        });

        let scores = current.predict_scores(train_set)?;
        let report = select_additive_samples(&scores, &labels, cfg)?;
        let selected = report.selected_count();
        rounds.push(SelectionRound {
            round: index,
            train_size: current_set.len(),
            report,
        });

        let stop = index >= cfg.max_models || selected == 0 || selected < cfg.min_hard_set;
        if stop {
            models.push(current);
            break;
        }
        let next = current.warm_start();
        models.push(current);
        current = next;
        current_set = build_next_training_set(&rounds[index - 1].report, train_set, cfg.next_set_mode)?;
        epochs = cfg.epochs_rest;
        source_round = Some(index);
    }

    Ok(Ensemble {
        config: cfg.clone(),
        vocab: train_set.vocab().clone(),
        seed,
        models,
        provenance,
        rounds,
    })
}

impl<C: Classifier> Ensemble<C> {
    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// Score matrices of every member on `data`, in member order.
    pub fn member_scores(&self, data: &Dataset) -> Result<Vec<ScoreMatrix>, EnsembleError> {
        self.models
            .iter()
            .map(|m| m.predict_scores(data).map_err(EnsembleError::from))
            .collect()
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<FusedPrediction>, EnsembleError> {
        fuse_predict(&self.member_scores(data)?)
    }

    pub fn fused_scores(&self, data: &Dataset) -> Result<ScoreMatrix, EnsembleError> {
        fuse_scores(&self.member_scores(data)?)
    }
}

impl Ensemble<Model> {
    pub fn member_scores_for_images(
        &self,
        items: &[(String, Tensor)],
    ) -> Result<Vec<ScoreMatrix>, EnsembleError> {
        self.models
            .iter()
            .map(|m| m.score_images(items).map_err(EnsembleError::from))
            .collect()
    }
}

/// Per-sample fusion result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedPrediction {
    pub label: usize,
    /// 0-based member index.
    pub model: usize,
    pub score: f64,
}

fn check_fusable(per_model: &[ScoreMatrix]) -> Result<&ScoreMatrix, EnsembleError> {
    let first = per_model.first().ok_or(EnsembleError::NoModels)?;
    for m in &per_model[1..] {
        check_aligned(first.sample_ids(), m.sample_ids())?;
        if !m.is_empty() && m.num_classes() != first.num_classes() {
            return Err(EnsembleError::LengthMismatch(format!(
                "{} classes vs {} classes",
                first.num_classes(),
                m.num_classes()
            )));
        }
    }
    Ok(first)
}

/// For each sample, the (model, class) pair holding the highest score over
/// every member and class. Ties go to the lower model index, then the lower
/// class index.
pub fn fuse_predict(per_model: &[ScoreMatrix]) -> Result<Vec<FusedPrediction>, EnsembleError> {
    let first = check_fusable(per_model)?;
    Ok((0..first.len())
        .map(|i| {
            let mut best = FusedPrediction {
                label: 0,
                model: 0,
                score: first.row(i)[0],
            };
            for (m, matrix) in per_model.iter().enumerate() {
                for (n, &v) in matrix.row(i).iter().enumerate() {
                    if v > best.score {
                        best = FusedPrediction { label: n, model: m, score: v };
                    }
                }
            }
            best
        })
        .collect())
}

/// Each sample's full row taken from its winning model (see [`fuse_predict`]).
pub fn fuse_scores(per_model: &[ScoreMatrix]) -> Result<ScoreMatrix, EnsembleError> {
    let first = check_fusable(per_model)?;
    let winners = fuse_predict(per_model)?;
    let rows = winners
        .iter()
        .enumerate()
        .map(|(i, w)| per_model[w.model].row(i).to_vec())
        .collect();
    ScoreMatrix::new(first.sample_ids().to_vec(), rows)
        .map_err(|e| EnsembleError::InvalidRow(e.to_string()))
}
