//! Batch commands behind the `mcnn` binary.
//!
//! Each command writes its artifacts through an [`ArtifactGuard`], which
//! removes everything the command wrote if it fails before committing.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    self, generate_synthetic, load_manifest, load_unlabeled, manifest_codes, write_manifest,
    ClassVocab, DataError, Dataset, SynthConfig,
};
use crate::ensemble::{fuse_predict, train_mcnn, Ensemble, EnsembleConfig, EnsembleError};
use crate::eval::{evaluate, metrics_json, roc_csv, roc_svg, EvalError};
use crate::model::{ConvBlock, Model, ModelConfig, ModelError};

pub const RESOLVED_CONFIG: &str = "resolved_config.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(
        "class vocabulary mismatch: ensemble has [{}], manifest has [{}]",
        .ensemble.join(","),
        .manifest.join(",")
    )]
    VocabMismatch {
        ensemble: Vec<String>,
        manifest: Vec<String>,
    },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config json: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Synthetic data parameters; the generator seed is the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub samples_per_class: usize,
    pub image_size: (usize, usize),
    pub noise_sigma: f64,
    pub jitter: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        let d = SynthConfig::default();
        SynthSection {
            samples_per_class: d.samples_per_class,
            image_size: d.image_size,
            noise_sigma: d.noise_sigma,
            jitter: d.jitter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestSource {
    pub path: PathBuf,
    /// Defaults to the manifest's directory.
    #[serde(default)]
    pub image_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synth(SynthSection),
    Manifest(ManifestSource),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synth(SynthSection::default())
    }
}

/// Model architecture; the initialisation seed is the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub input_shape: (usize, usize, usize),
    pub conv_blocks: Vec<ConvBlock>,
    pub same_padding: bool,
    pub hidden_dense: Option<usize>,
    pub num_classes: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        let d = ModelConfig::default();
        ModelSection {
            input_shape: d.input_shape,
            conv_blocks: d.conv_blocks,
            same_padding: d.same_padding,
            hidden_dense: d.hidden_dense,
            num_classes: d.num_classes,
        }
    }
}

/// Everything a run needs. Unknown keys are rejected; missing keys take
/// the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub data: DataSource,
    /// Train/validation/test fractions used by `synth` to write split manifests.
    pub split: [f64; 3],
    pub model: ModelSection,
    pub ensemble: EnsembleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            out: PathBuf::from("mcnn_out"),
            data: DataSource::default(),
            split: [0.8, 0.1, 0.1],
            model: ModelSection::default(),
            ensemble: EnsembleConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threshold: Option<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads `path` (or starts from defaults), applies overrides and validates.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => Self::from_json(&fs::read_to_string(p).map_err(io_err(p))?)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &overrides.out {
            cfg.out = out.clone();
        }
        if let Some(t) = overrides.threshold {
            cfg.ensemble.threshold = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let config = |e: String| CliError::Config(e);
        self.ensemble.validate().map_err(|e| config(e.to_string()))?;
        self.model_config().validate().map_err(|e| config(e.to_string()))?;
        if self.model.num_classes != ClassVocab::default().len() {
            return Err(config(format!(
                "model.num_classes is {} but the class vocabulary has {}",
                self.model.num_classes,
                ClassVocab::default().len()
            )));
        }
        if let DataSource::Synth(s) = &self.data {
            self.synth_config(s).validate().map_err(|e| config(e.to_string()))?;
            let (h, w) = s.image_size;
            if self.model.input_shape != (1, h, w) {
                return Err(config(format!(
                    "model.input_shape {:?} does not match synthetic images (1, {h}, {w})",
                    self.model.input_shape
                )));
            }
        }
        let total: f64 = self.split.iter().sum();
        if self.split.iter().any(|f| !(*f >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(config(format!("split {:?} must be non-negative and sum to 1", self.split)));
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            input_shape: self.model.input_shape,
            conv_blocks: self.model.conv_blocks.clone(),
            same_padding: self.model.same_padding,
            hidden_dense: self.model.hidden_dense,
            num_classes: self.model.num_classes,
            seed: self.seed,
        }
    }

    pub fn synth_config(&self, s: &SynthSection) -> SynthConfig {
        SynthConfig {
            samples_per_class: s.samples_per_class,
            image_size: s.image_size,
            noise_sigma: s.noise_sigma,
            jitter: s.jitter,
            seed: self.seed,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialises");
        s.push('\n');
        s
    }

    /// Dataset named by `data`.
    pub fn load_dataset(&self) -> Result<Dataset, CliError> {
        let vocab = ClassVocab::default();
        Ok(match &self.data {
            DataSource::Synth(s) => generate_synthetic(&self.synth_config(s), &vocab)?,
            DataSource::Manifest(m) => {
                let dir = m.image_dir.clone().unwrap_or_else(|| parent_dir(&m.path));
                load_manifest(&m.path, &dir, &vocab)?
            }
        })
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

/// Tracks files a command writes and deletes them unless [`commit`](Self::commit) is called.
pub struct ArtifactGuard {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    committed: bool,
}

impl ArtifactGuard {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(ArtifactGuard {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
            committed: false,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Registers `path` before it is written so partial writes are cleaned up too.
    pub fn track(&mut self, path: PathBuf) -> PathBuf {
        self.files.push(path.clone());
        path
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf, CliError> {
        let path = self.track(self.dir.join(name));
        fs::write(&path, contents).map_err(io_err(&path))?;
        Ok(path)
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for ArtifactGuard {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}

/// Writes the synthetic dataset as PGM files plus `manifest.csv` and the
/// split manifests `train.csv`, `val.csv`, `test.csv`.
pub fn cmd_synth(cfg: &RunConfig, log: &mut dyn Write) -> Result<Dataset, CliError> {
    let DataSource::Synth(section) = &cfg.data else {
        return Err(CliError::Config("synth requires a \"synth\" data source".into()));
    };
    let vocab = ClassVocab::default();
    let dataset = generate_synthetic(&cfg.synth_config(section), &vocab)?;
    let (train, val, test) = data::split(&dataset, cfg.split, cfg.seed)?;

    let mut guard = ArtifactGuard::new(&cfg.out)?;
    for s in dataset.iter() {
        let path = guard.track(cfg.out.join(format!("{}.pgm", s.id)));
        data::netpbm::save_image(&path, &s.image).map_err(|source| DataError::Image {
            path: path.clone(),
            source,
        })?;
    }
    for (name, set) in [("manifest.csv", &dataset), ("train.csv", &train), ("val.csv", &val), ("test.csv", &test)] {
        let path = guard.track(cfg.out.join(name));
        write_manifest(&path, set)?;
    }
    guard.write(RESOLVED_CONFIG, cfg.to_json())?;
    guard.commit();

    let counts = dataset.class_counts();
    for (c, n) in counts.iter().enumerate() {
        writeln!(log, "{}\t{n}", vocab.code(c)).map_err(io_err(Path::new("<stdout>")))?;
    }
    Ok(dataset)
}

/// Trains an ensemble on the configured data and writes it to `cfg.out`.
/// Logs one tab-separated line per round: round, train_size, selected,
/// mean_top_score.
pub fn cmd_train(cfg: &RunConfig, log: &mut dyn Write) -> Result<Ensemble<Model>, CliError> {
    let dataset = cfg.load_dataset()?;
    let ensemble = train_mcnn(&dataset, &cfg.model_config(), &cfg.ensemble, cfg.seed)?;

    let mut guard = ArtifactGuard::new(&cfg.out)?;
    for (i, m) in ensemble.models.iter().enumerate() {
        guard.write(&crate::ensemble::model_file_name(i), m.to_bytes())?;
    }
    guard.write(crate::ensemble::ENSEMBLE_MANIFEST, ensemble.manifest_json()?)?;
    guard.write(RESOLVED_CONFIG, cfg.to_json())?;
    guard.commit();

    let stdout = Path::new("<stdout>");
    writeln!(log, "round\ttrain_size\tselected\tmean_top_score").map_err(io_err(stdout))?;
    for r in &ensemble.rounds {
        writeln!(
            log,
            "{}\t{}\t{}\t{:.6}",
            r.round,
            r.train_size,
            r.report.selected_count(),
            r.report.mean_top_score()
        )
        .map_err(io_err(stdout))?;
    }
    Ok(ensemble)
}

fn check_vocab(ensemble: &Ensemble<Model>, manifest: &Path, labels_required: bool) -> Result<(), CliError> {
    let codes = manifest_codes(manifest)?;
    if codes.is_empty() && !labels_required {
        return Ok(());
    }
    let a: BTreeSet<&str> = ensemble.vocab.codes().iter().map(String::as_str).collect();
    let b: BTreeSet<&str> = codes.iter().map(String::as_str).collect();
    if a != b || codes.len() != b.len() {
        return Err(CliError::VocabMismatch {
            ensemble: ensemble.vocab.codes().to_vec(),
            manifest: codes,
        });
    }
    Ok(())
}

/// Evaluates the fused ensemble on a labelled manifest, writing
/// `metrics.json`, `roc_<CODE>.csv` for each computable class and `roc.svg`.
pub fn cmd_eval(
    ensemble_dir: &Path,
    manifest: &Path,
    image_dir: Option<&Path>,
    out_dir: &Path,
) -> Result<crate::eval::EvalSummary, CliError> {
    let ensemble = Ensemble::<Model>::load_dir(ensemble_dir)?;
    check_vocab(&ensemble, manifest, true)?;
    let dir = image_dir.map_or_else(|| parent_dir(manifest), Path::to_path_buf);
    let dataset = load_manifest(manifest, &dir, &ensemble.vocab)?;
    let fused = ensemble.fused_scores(&dataset)?;
    let summary = evaluate(&fused, &dataset.labels())?;

    let mut guard = ArtifactGuard::new(out_dir)?;
    guard.write("metrics.json", metrics_json(&summary, &ensemble.vocab))?;
    for curve in &summary.curves {
        guard.write(&format!("roc_{}.csv", ensemble.vocab.code(curve.class_index)), roc_csv(curve))?;
    }
    guard.write("roc.svg", roc_svg(&summary.curves, &ensemble.vocab))?;
    guard.commit();
    Ok(summary)
}

/// One prediction row of `cmd_predict`'s output.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub image: String,
    pub predicted_class: String,
    /// 1-based, matching `model_NNN.mcnn`.
    pub winning_model: usize,
    pub winning_score: f64,
}

/// Writes `image,predicted_class,winning_model,winning_score` for every
/// manifest row, in manifest order. Class columns in the manifest are optional.
pub fn cmd_predict(
    ensemble_dir: &Path,
    manifest: &Path,
    image_dir: Option<&Path>,
    out_path: &Path,
) -> Result<Vec<PredictionRow>, CliError> {
    let ensemble = Ensemble::<Model>::load_dir(ensemble_dir)?;
    check_vocab(&ensemble, manifest, false)?;
    let dir = image_dir.map_or_else(|| parent_dir(manifest), Path::to_path_buf);
    let items = load_unlabeled(manifest, &dir, &ensemble.vocab)?;
    let per_model = ensemble.member_scores_for_images(&items)?;
    let fused = fuse_predict(&per_model)?;

    let rows: Vec<PredictionRow> = items
        .iter()
        .zip(&fused)
        .map(|((id, _), f)| PredictionRow {
            image: id.clone(),
            predicted_class: ensemble.vocab.code(f.label).to_string(),
            winning_model: f.model + 1,
            winning_score: f.score,
        })
        .collect();
    let mut text = String::from("image,predicted_class,winning_model,winning_score\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{}\n",
            r.image, r.predicted_class, r.winning_model, r.winning_score
        ));
    }
    let parent = parent_dir(out_path);
    let mut guard = ArtifactGuard::new(&parent)?;
    let name = out_path
        .file_name()
        .ok_or_else(|| CliError::Config(format!("output path {} has no file name", out_path.display())))?;
    guard.write(&name.to_string_lossy(), text)?;
    guard.commit();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_json(r#"{"seed": 1, "bogus": true}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        assert!(RunConfig::from_json(r#"{"ensemble": {"treshold": 0.5}}"#).is_err());
    }

    #[test]
    fn missing_keys_take_defaults() {
        let cfg = RunConfig::from_json(r#"{"seed": 7}"#).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.ensemble, EnsembleConfig::default());
        assert_eq!(cfg.model, ModelSection::default());
    }

    #[test]
    fn overrides_take_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"seed": 3, "ensemble": {"threshold": 0.5}}"#).unwrap();
        let cfg = RunConfig::resolve(Some(&path), &Overrides::default()).unwrap();
        assert_eq!((cfg.seed, cfg.ensemble.threshold), (3, 0.5));
        let o = Overrides { seed: Some(9), out: Some("x".into()), threshold: Some(0.7) };
        let cfg = RunConfig::resolve(Some(&path), &o).unwrap();
        assert_eq!((cfg.seed, cfg.ensemble.threshold), (9, 0.7));
        assert_eq!(cfg.out, PathBuf::from("x"));
    }

    #[test]
    fn resolved_json_roundtrips() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn mismatched_input_shape_rejected() {
        let mut cfg = RunConfig::default();
        cfg.model.input_shape = (1, 32, 32);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn guard_removes_uncommitted_outputs() {
        let root = tempfile::tempdir().unwrap();
        let out = root.path().join("run");
        {
            let mut g = ArtifactGuard::new(&out).unwrap();
            g.write("a.txt", "x").unwrap();
        }
        assert!(!out.exists());
        {
            let mut g = ArtifactGuard::new(&out).unwrap();
            g.write("a.txt", "x").unwrap();
            g.commit();
        }
        assert!(out.join("a.txt").exists());
    }
}
