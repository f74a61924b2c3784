//! Ensemble directory layout: `model_001.mcnn`, `model_002.mcnn`, ... plus
//! `ensemble.json` holding config, vocabulary, provenance and round stats.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    Ensemble, EnsembleConfig, EnsembleError, ModelProvenance, SelectionEntry, SelectionReport,
    SelectionRound,
};
use crate::data::ClassVocab;
use crate::model::{Model, ModelConfig, TrainReport};

pub const ENSEMBLE_MANIFEST: &str = "ensemble.json";
const FORMAT_TAG: &str = "mcnn-ensemble";
const FORMAT_VERSION: u32 = 1;

/// `model_001.mcnn` for the first member (`index` is 0-based).
pub fn model_file_name(index: usize) -> String {
    format!("model_{:03}.mcnn", index + 1)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    format: String,
    version: u32,
    seed: u64,
    vocab: ClassVocab,
    model_config: ModelConfig,
    config: EnsembleConfig,
    models: Vec<MemberRecord>,
    rounds: Vec<RoundRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberRecord {
    file: String,
    train_size: usize,
    epochs: usize,
    source_round: Option<usize>,
    /// Number of samples selected in `source_round`.
    selected_count: Option<usize>,
    train_ids: Vec<String>,
    epoch_losses: Vec<f64>,
    train_accuracy: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoundRecord {
    round: usize,
    train_size: usize,
    selected: usize,
    mean_top_score: f64,
    threshold: f64,
    predicate: super::SelectionPredicate,
    samples: Vec<SelectionEntry>,
}

impl Ensemble<Model> {
    /// Writes every member and `ensemble.json` into `dir` (created if
    /// needed). Output bytes depend only on the ensemble contents.
    pub fn save_dir(&self, dir: &Path) -> Result<(), EnsembleError> {
        fs::create_dir_all(dir)?;
        for (i, m) in self.models.iter().enumerate() {
            m.save(&dir.join(model_file_name(i)))?;
        }
        fs::write(dir.join(ENSEMBLE_MANIFEST), self.manifest_json()?)?;
        Ok(())
    }

    pub fn manifest_json(&self) -> Result<String, EnsembleError> {
        let model_config = self
            .models
            .first()
            .ok_or(EnsembleError::NoModels)?
            .config()
            .clone();
        let models = self
            .provenance
            .iter()
            .enumerate()
            .map(|(i, p)| MemberRecord {
                file: model_file_name(i),
                train_size: p.train_ids.len(),
                epochs: p.epochs,
                source_round: p.source_round,
                selected_count: p
                    .source_round
                    .map(|r| self.rounds[r - 1].report.selected_count()),
                train_ids: p.train_ids.clone(),
                epoch_losses: p.train_report.epoch_losses.clone(),
                train_accuracy: p.train_report.train_accuracy,
            })
            .collect();
        let rounds = self
            .rounds
            .iter()
            .map(|r| RoundRecord {
                round: r.round,
                train_size: r.train_size,
                selected: r.report.selected_count(),
                mean_top_score: r.report.mean_top_score(),
                threshold: r.report.threshold,
                predicate: r.report.predicate,
                samples: r.report.entries.clone(),
            })
            .collect();
        let file = ManifestFile {
            format: FORMAT_TAG.into(),
            version: FORMAT_VERSION,
            seed: self.seed,
            vocab: self.vocab.clone(),
            model_config,
            config: self.config.clone(),
            models,
            rounds,
        };
        let mut json = serde_json::to_string_pretty(&file)?;
        json.push('\n');
        Ok(json)
    }

    pub fn load_dir(dir: &Path) -> Result<Self, EnsembleError> {
        let text = fs::read_to_string(dir.join(ENSEMBLE_MANIFEST))?;
        let file: ManifestFile = serde_json::from_str(&text)?;
        if file.format != FORMAT_TAG || file.version != FORMAT_VERSION {
            return Err(EnsembleError::Format(format!(
                "unsupported format {:?} version {}",
                file.format, file.version
            )));
        }
        if file.models.is_empty() {
            return Err(EnsembleError::NoModels);
        }
        let mut models = Vec::with_capacity(file.models.len());
        let mut provenance = Vec::with_capacity(file.models.len());
        for (i, rec) in file.models.into_iter().enumerate() {
            if rec.file != model_file_name(i) {
                return Err(EnsembleError::Format(format!(
                    "member {} is named {:?}, expected {:?}",
                    i + 1,
                    rec.file,
                    model_file_name(i)
                )));
            }
            let model = Model::load(&dir.join(&rec.file))?;
            if model.config().num_classes != file.vocab.len() {
                return Err(EnsembleError::Format(format!(
                    "{} predicts {} classes but the vocabulary has {}",
                    rec.file,
                    model.config().num_classes,
                    file.vocab.len()
                )));
            }
            models.push(model);
            provenance.push(ModelProvenance {
                train_ids: rec.train_ids,
                epochs: rec.epochs,
                source_round: rec.source_round,
                train_report: TrainReport {
                    epochs_run: rec.epochs,
                    epoch_losses: rec.epoch_losses,
                    train_accuracy: rec.train_accuracy,
                },
            });
        }
        let rounds = file
            .rounds
            .into_iter()
            .map(|r| SelectionRound {
                round: r.round,
                train_size: r.train_size,
                report: SelectionReport {
                    threshold: r.threshold,
                    predicate: r.predicate,
                    entries: r.samples,
                },
            })
            .collect();
        Ok(Ensemble {
            config: file.config,
            vocab: file.vocab,
            seed: file.seed,
            models,
            provenance,
            rounds,
        })
    }
}
