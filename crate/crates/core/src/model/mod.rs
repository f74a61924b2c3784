//! A small configurable CNN: `[pad] -> conv -> ReLU -> 2x2 max-pool` blocks,
//! an optional hidden dense layer, and a dense softmax head.

mod io;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::ops;
use crate::optim::{sgd_step, SgdConfig};
use crate::scores::{ScoreError, ScoreMatrix};
use crate::tensor::{Tensor, TensorError};

pub use io::FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config at {layer}: {reason}")]
    InvalidConfig { layer: String, reason: String },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid training request: {0}")]
    InvalidTraining(String),
    #[error("sample {id}: image shape {actual:?} does not match model input {expected:?}")]
    InputShape {
        id: String,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("bad magic: expected \"MCNN\"")]
    BadMagic,
    #[error("format version mismatch: file has {found}, supported {expected}")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("truncated model file")]
    Truncated,
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Scores(#[from] ScoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvBlock {
    pub out_channels: usize,
    pub kernel_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// `(channels, height, width)`
    pub input_shape: (usize, usize, usize),
    pub conv_blocks: Vec<ConvBlock>,
    /// Zero-pad each convolution input by `kernel_size / 2` so spatial size
    /// is preserved; requires odd kernels.
    pub same_padding: bool,
    pub hidden_dense: Option<usize>,
    pub num_classes: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            input_shape: (1, 28, 28),
            conv_blocks: vec![
                ConvBlock { out_channels: 8, kernel_size: 3 },
                ConvBlock { out_channels: 16, kernel_size: 3 },
            ],
            same_padding: true,
            hidden_dense: None,
            num_classes: 7,
            seed: 42,
        }
    }
}

/// Resolved geometry of one convolution block.
#[derive(Debug, Clone, Copy)]
struct BlockPlan {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    pad: usize,
}

#[derive(Debug, Clone)]
struct Plan {
    blocks: Vec<BlockPlan>,
    flat: usize,
}

impl ModelConfig {
    fn plan(&self) -> Result<Plan, ModelError> {
        let bad = |layer: String, reason: String| ModelError::InvalidConfig { layer, reason };
        let (c, h, w) = self.input_shape;
        if c == 0 || h == 0 || w == 0 {
            return Err(bad("input".into(), format!("shape {:?} has a zero dimension", self.input_shape)));
        }
        if self.num_classes < 2 {
            return Err(bad("head".into(), format!("num_classes {} < 2", self.num_classes)));
        }
        if self.hidden_dense == Some(0) {
            return Err(bad("hidden dense".into(), "width must be positive".into()));
        }
        let (mut c, mut h, mut w) = (c, h, w);
        let mut blocks = Vec::with_capacity(self.conv_blocks.len());
        for (i, b) in self.conv_blocks.iter().enumerate() {
            let layer = format!("conv block {}", i + 1);
            if b.out_channels == 0 || b.kernel_size == 0 {
                return Err(bad(layer, "out_channels and kernel_size must be positive".into()));
            }
            let pad = if self.same_padding {
                if b.kernel_size % 2 == 0 {
                    return Err(bad(layer, format!("same padding needs an odd kernel, got {}", b.kernel_size)));
                }
                b.kernel_size / 2
            } else {
                0
            };
            let (ph, pw) = (h + 2 * pad, w + 2 * pad);
            if b.kernel_size > ph || b.kernel_size > pw {
                return Err(bad(layer, format!("kernel {} larger than input {h}x{w}", b.kernel_size)));
            }
            let (oh, ow) = (ph - b.kernel_size + 1, pw - b.kernel_size + 1);
            if oh % 2 != 0 || ow % 2 != 0 {
                return Err(bad(layer, format!("pooling input {oh}x{ow} is not even")));
            }
            blocks.push(BlockPlan {
                in_channels: c,
                out_channels: b.out_channels,
                kernel: b.kernel_size,
                pad,
            });
            c = b.out_channels;
            h = oh / 2;
            w = ow / 2;
        }
        Ok(Plan {
            blocks,
            flat: c * h * w,
        })
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.plan().map(|_| ())
    }

    /// Shapes of every parameter tensor, in storage order: each block's
    /// kernels and bias, then the hidden layer (if any), then the head.
    pub fn param_shapes(&self) -> Result<Vec<Vec<usize>>, ModelError> {
        let plan = self.plan()?;
        let mut shapes = Vec::new();
        for b in &plan.blocks {
            shapes.push(vec![b.out_channels, b.in_channels, b.kernel, b.kernel]);
            shapes.push(vec![b.out_channels]);
        }
        let mut width = plan.flat;
        if let Some(hidden) = self.hidden_dense {
            shapes.push(vec![hidden, width]);
            shapes.push(vec![hidden]);
            width = hidden;
        }
        shapes.push(vec![self.num_classes, width]);
        shapes.push(vec![self.num_classes]);
        Ok(shapes)
    }

    pub fn input_dims(&self) -> [usize; 3] {
        [self.input_shape.0, self.input_shape.1, self.input_shape.2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Mean cross-entropy over the samples of each epoch.
    pub epoch_losses: Vec<f64>,
    /// Top-1 accuracy on the training data after the final epoch.
    pub train_accuracy: f64,
}

/// Trained (or freshly initialised) network plus its momentum buffers.
#[derive(Debug, Clone)]
pub struct Model {
    config: ModelConfig,
    plan: Plan,
    params: Vec<Tensor>,
    velocity: Vec<Tensor>,
}

struct BlockTrace {
    padded: Tensor,
    conv: Tensor,
    pool_indices: Vec<usize>,
    pooled_shape: Vec<usize>,
}

struct Trace {
    blocks: Vec<BlockTrace>,
    flat: Tensor,
    hidden_pre: Option<Tensor>,
    head_input: Tensor,
}

impl Model {
    /// He-normal weights (std `sqrt(2 / fan_in)`) drawn from a generator
    /// seeded with `cfg.seed`; zero biases and velocity.
    pub fn build(cfg: &ModelConfig) -> Result<Self, ModelError> {
        let plan = cfg.plan()?;
        let shapes = cfg.param_shapes()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let params: Vec<Tensor> = shapes
            .iter()
            .map(|shape| {
                if shape.len() == 1 {
                    return Tensor::zeros(shape);
                }
                let fan_in: usize = shape[1..].iter().product();
                let normal = Normal::new(0.0f32, (2.0 / fan_in as f32).sqrt()).expect("positive std");
                let mut t = Tensor::zeros(shape);
                for v in t.data_mut() {
                    *v = normal.sample(&mut rng);
                }
                t
            })
            .collect();
        let velocity = params.iter().map(Tensor::zeros_like).collect();
        Ok(Model {
            config: cfg.clone(),
            plan,
            params,
            velocity,
        })
    }

    pub(crate) fn from_parts(config: ModelConfig, params: Vec<Tensor>) -> Result<Self, ModelError> {
        let plan = config.plan()?;
        let shapes = config.param_shapes()?;
        if shapes.len() != params.len() {
            return Err(ModelError::Corrupt(format!(
                "expected {} parameter tensors, found {}",
                shapes.len(),
                params.len()
            )));
        }
        for (i, (shape, p)) in shapes.iter().zip(&params).enumerate() {
            if p.shape() != shape.as_slice() {
                return Err(ModelError::Corrupt(format!(
                    "parameter {i} has shape {:?}, config implies {shape:?}",
                    p.shape()
                )));
            }
        }
        let velocity = params.iter().map(Tensor::zeros_like).collect();
        Ok(Model {
            config,
            plan,
            params,
            velocity,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn parameters(&self) -> &[Tensor] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [Tensor] {
        &mut self.params
    }

    pub fn velocity(&self) -> &[Tensor] {
        &self.velocity
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    /// Copy of the trained parameters with zeroed momentum, used to start the
    /// next ensemble member from its predecessor.
    pub fn warm_start(&self) -> Model {
        Model {
            config: self.config.clone(),
            plan: self.plan.clone(),
            params: self.params.clone(),
            velocity: self.params.iter().map(Tensor::zeros_like).collect(),
        }
    }

    /// Bitwise equality of configuration and parameters (velocity ignored).
    pub fn same_parameters(&self, other: &Model) -> bool {
        self.config == other.config
            && self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|(a, b)| a.bitwise_eq(b))
    }

    fn check_input(&self, id: &str, image: &Tensor) -> Result<(), ModelError> {
        let expected = self.config.input_dims();
        if image.shape() != expected {
            return Err(ModelError::InputShape {
                id: id.to_string(),
                expected: expected.to_vec(),
                actual: image.shape().to_vec(),
            });
        }
        Ok(())
    }

    fn forward(&self, image: &Tensor) -> Result<(Tensor, Trace), TensorError> {
        let mut x = image.clone();
        let mut blocks = Vec::with_capacity(self.plan.blocks.len());
        for (b, bp) in self.plan.blocks.iter().enumerate() {
            let padded = ops::pad2d_forward(&x, bp.pad)?;
            let conv = ops::conv2d_forward(&padded, &self.params[2 * b], &self.params[2 * b + 1])?;
            let act = ops::relu_forward(&conv);
            let (pooled, pool_indices) = ops::maxpool2_forward(&act)?;
            blocks.push(BlockTrace {
                padded,
                conv,
                pool_indices,
                pooled_shape: pooled.shape().to_vec(),
            });
            x = pooled;
        }
        let flat = x.reshape(vec![self.plan.flat])?;
        let mut p = 2 * self.plan.blocks.len();
        let (hidden_pre, head_input) = if self.config.hidden_dense.is_some() {
            let pre = ops::dense_forward(&flat, &self.params[p], &self.params[p + 1])?;
            p += 2;
            let act = ops::relu_forward(&pre);
            (Some(pre), act)
        } else {
            (None, flat.clone())
        };
        let logits = ops::dense_forward(&head_input, &self.params[p], &self.params[p + 1])?;
        Ok((
            logits,
            Trace {
                blocks,
                flat,
                hidden_pre,
                head_input,
            },
        ))
    }

    fn backward(&self, trace: &Trace, d_logits: &Tensor) -> Result<Vec<Tensor>, TensorError> {
        let mut grads: Vec<Option<Tensor>> = vec![None; self.params.len()];
        let n = self.params.len();
        let head = ops::dense_backward(&trace.head_input, &self.params[n - 2], &self.params[n - 1], d_logits)?;
        let [dw, db]: [Tensor; 2] = head.param_grads.try_into().expect("dense has two params");
        grads[n - 2] = Some(dw);
        grads[n - 1] = Some(db);
        let mut dx = head.input_grad;
        if let Some(pre) = &trace.hidden_pre {
            let d_pre = ops::relu_backward(pre, &dx)?;
            let g = ops::dense_backward(&trace.flat, &self.params[n - 4], &self.params[n - 3], &d_pre)?;
            let [dw, db]: [Tensor; 2] = g.param_grads.try_into().expect("dense has two params");
            grads[n - 4] = Some(dw);
            grads[n - 3] = Some(db);
            dx = g.input_grad;
        }
        for (b, bt) in trace.blocks.iter().enumerate().rev() {
            let pooled = dx.reshape(bt.pooled_shape.clone())?;
            let d_act = ops::maxpool2_backward(&bt.pool_indices, &pooled, bt.conv.shape())?;
            let d_conv = ops::relu_backward(&bt.conv, &d_act)?;
            let g = ops::conv2d_backward(&bt.padded, &self.params[2 * b], &self.params[2 * b + 1], &d_conv)?;
            let [dk, dbias]: [Tensor; 2] = g.param_grads.try_into().expect("conv has two params");
            grads[2 * b] = Some(dk);
            grads[2 * b + 1] = Some(dbias);
            if b == 0 {
                break;
            }
            dx = ops::pad2d_backward(&g.input_grad, self.plan.blocks[b].pad)?;
        }
        Ok(grads.into_iter().map(|g| g.expect("every parameter receives a gradient")).collect())
    }

    /// Loss and parameter gradients for one labelled image.
    fn sample_gradients(&self, image: &Tensor, one_hot: &Tensor) -> Result<(f64, Vec<Tensor>), TensorError> {
        let (logits, trace) = self.forward(image)?;
        let scores = ops::softmax(&logits)?;
        let (loss, d_logits) = ops::cross_entropy_loss(&scores, one_hot)?;
        Ok((loss, self.backward(&trace, &d_logits)?))
    }

    fn score_one(&self, image: &Tensor) -> Result<Vec<f64>, TensorError> {
        let (logits, _) = self.forward(image)?;
        Ok(ops::softmax(&logits)?.data().iter().map(|&v| v as f64).collect())
    }

    /// Mini-batch SGD for `epochs` passes. Each epoch visits `data` in an
    /// order drawn from a generator seeded with `seed`; batch gradients are
    /// the mean of per-sample gradients.
    ///
    /// Per-sample gradients may be computed on several threads, but they are
    /// reduced in sample order so the result does not depend on thread count.
    pub fn train(
        &mut self,
        data: &Dataset,
        epochs: usize,
        batch_size: usize,
        sgd: &SgdConfig,
        seed: u64,
    ) -> Result<TrainReport, ModelError> {
        if data.is_empty() {
            return Err(ModelError::EmptyDataset);
        }
        if epochs == 0 {
            return Err(ModelError::InvalidTraining("epochs must be >= 1".into()));
        }
        if batch_size == 0 {
            return Err(ModelError::InvalidTraining("batch_size must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&sgd.momentum) || !(sgd.learning_rate >= 0.0 && sgd.learning_rate.is_finite()) {
            return Err(ModelError::InvalidTraining(format!("invalid SGD settings {sgd:?}")));
        }
        for s in data.iter() {
            self.check_input(&s.id, &s.image)?;
        }
        if data.num_classes() != self.config.num_classes {
            return Err(ModelError::InvalidTraining(format!(
                "dataset has {} classes, model has {}",
                data.num_classes(),
                self.config.num_classes
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut epoch_losses = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            let mut loss_sum = 0f64;
            for batch in order.chunks(batch_size) {
                let model = &*self;
                let results: Vec<(f64, Vec<Tensor>)> = batch
                    .par_iter()
                    .map(|&pos| {
                        let s = data.get(pos);
                        model.sample_gradients(&s.image, &s.one_hot(model.config.num_classes))
                    })
                    .collect::<Result<_, _>>()?;
                let mut acc: Vec<Vec<f64>> = self.params.iter().map(|p| vec![0f64; p.len()]).collect();
                for (loss, grads) in &results {
                    loss_sum += loss;
                    for (a, g) in acc.iter_mut().zip(grads) {
                        for (av, &gv) in a.iter_mut().zip(g.data()) {
                            *av += gv as f64;
                        }
                    }
                }
                let scale = 1.0 / batch.len() as f64;
                let mean: Vec<Tensor> = acc
                    .into_iter()
                    .zip(&self.params)
                    .map(|(a, p)| {
                        Tensor::new(p.shape().to_vec(), a.into_iter().map(|v| (v * scale) as f32).collect())
                    })
                    .collect::<Result<_, _>>()?;
                sgd_step(&mut self.params, &mean, &mut self.velocity, sgd)?;
            }
            epoch_losses.push(loss_sum / data.len() as f64);
        }
        if let Some(i) = self.params.iter().position(|p| !p.is_finite()) {
            return Err(ModelError::InvalidTraining(format!(
                "parameter tensor {i} diverged to a non-finite value"
            )));
        }

        let scores = self.predict_scores(data)?;
        let correct = data
            .iter()
            .zip(scores.rows())
            .filter(|(s, row)| argmax(row) == s.label)
            .count();
        Ok(TrainReport {
            epochs_run: epochs,
            epoch_losses,
            train_accuracy: correct as f64 / data.len() as f64,
        })
    }

    /// One softmax row per sample, in batch order. Never mutates the model.
    pub fn predict_scores(&self, batch: &Dataset) -> Result<ScoreMatrix, ModelError> {
        for s in batch.iter() {
            self.check_input(&s.id, &s.image)?;
        }
        let samples: Vec<_> = batch.iter().collect();
        let rows = samples
            .par_iter()
            .map(|s| self.score_one(&s.image))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScoreMatrix::new(batch.ids(), rows)?)
    }

    /// Scores unlabelled `(id, image)` pairs, in input order.
    pub fn score_images(&self, items: &[(String, Tensor)]) -> Result<ScoreMatrix, ModelError> {
        for (id, image) in items {
            self.check_input(id, image)?;
        }
        let rows = items
            .par_iter()
            .map(|(_, image)| self.score_one(image))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ScoreMatrix::new(items.iter().map(|(id, _)| id.clone()).collect(), rows)?)
    }
}

/// Index of the largest entry, lowest index on ties.
pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, ClassVocab, SynthConfig};

    fn small_cfg() -> ModelConfig {
        ModelConfig {
            input_shape: (1, 8, 8),
            conv_blocks: vec![ConvBlock { out_channels: 2, kernel_size: 3 }],
            ..ModelConfig::default()
        }
    }

    fn small_data(n: usize) -> Dataset {
        let cfg = SynthConfig {
            samples_per_class: n,
            image_size: (8, 8),
            ..SynthConfig::default()
        };
        generate_synthetic(&cfg, &ClassVocab::default()).unwrap()
    }

    #[test]
    fn default_param_count_by_hand() {
        // conv1 8*1*3*3 + 8, conv2 16*8*3*3 + 16, head 7*(16*7*7) + 7
        let m = Model::build(&ModelConfig::default()).unwrap();
        assert_eq!(m.param_count(), 80 + 1168 + 5495);
        assert_eq!(m.param_count(), 6743);
    }

    #[test]
    fn build_is_deterministic_and_seed_sensitive() {
        let a = Model::build(&ModelConfig::default()).unwrap();
        let b = Model::build(&ModelConfig::default()).unwrap();
        assert!(a.same_parameters(&b));
        let c = Model::build(&ModelConfig { seed: 7, ..ModelConfig::default() }).unwrap();
        assert!(a.parameters().iter().zip(c.parameters()).any(|(x, y)| !x.bitwise_eq(y)));
        assert!(a.parameters()[1].data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_configs_name_the_layer() {
        let cfg = ModelConfig { same_padding: false, ..ModelConfig::default() };
        let err = Model::build(&cfg).unwrap_err().to_string();
        assert!(err.contains("conv block 2"), "{err}");
        let cfg = ModelConfig { num_classes: 1, ..ModelConfig::default() };
        assert!(Model::build(&cfg).unwrap_err().to_string().contains("head"));
        let cfg = ModelConfig {
            conv_blocks: vec![ConvBlock { out_channels: 4, kernel_size: 2 }],
            ..ModelConfig::default()
        };
        assert!(Model::build(&cfg).is_err());
    }

    #[test]
    fn valid_padding_geometry() {
        // 30 -> 28 -> 14 -> 12 -> 6
        let cfg = ModelConfig { input_shape: (1, 30, 30), same_padding: false, ..ModelConfig::default() };
        let shapes = cfg.param_shapes().unwrap();
        assert_eq!(shapes.last().unwrap(), &vec![7]);
        assert_eq!(shapes[4], vec![7, 16 * 6 * 6]);
    }

    #[test]
    fn warm_start_copies_and_resets_velocity() {
        let data = small_data(2);
        let mut base = Model::build(&small_cfg()).unwrap();
        base.train(&data, 2, 4, &SgdConfig::default(), 1).unwrap();
        assert!(base.velocity().iter().any(|v| v.data().iter().any(|&x| x != 0.0)));
        let mut copy = base.warm_start();
        assert!(copy.same_parameters(&base));
        assert!(copy.velocity().iter().all(|v| v.data().iter().all(|&x| x == 0.0)));
        copy.parameters_mut()[0].data_mut()[0] += 1.0;
        assert!(!copy.same_parameters(&base));
        let fresh = base.warm_start();
        assert_eq!(fresh.predict_scores(&data).unwrap(), base.predict_scores(&data).unwrap());
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let data = small_data(1).subset(&[0]);
        let mut m = Model::build(&small_cfg()).unwrap();
        let before = m.clone();
        let sgd = SgdConfig { learning_rate: 0.0, momentum: 0.9 };
        let report = m.train(&data, 1, 16, &sgd, 3).unwrap();
        assert_eq!(report.epochs_run, 1);
        assert!(m.same_parameters(&before));
    }

    #[test]
    fn training_is_deterministic() {
        let data = small_data(3);
        let mut a = Model::build(&small_cfg()).unwrap();
        let mut b = Model::build(&small_cfg()).unwrap();
        let ra = a.train(&data, 3, 4, &SgdConfig::default(), 11).unwrap();
        let rb = b.train(&data, 3, 4, &SgdConfig::default(), 11).unwrap();
        assert!(a.same_parameters(&b));
        assert_eq!(ra, rb);
    }

    #[test]
    fn train_rejects_empty_and_zero_epochs() {
        let data = small_data(1);
        let mut m = Model::build(&small_cfg()).unwrap();
        assert!(matches!(
            m.train(&data.subset(&[]), 1, 4, &SgdConfig::default(), 0),
            Err(ModelError::EmptyDataset)
        ));
        assert!(m.train(&data, 0, 4, &SgdConfig::default(), 0).is_err());
    }

    #[test]
    fn zero_weights_give_uniform_rows() {
        let mut m = Model::build(&ModelConfig::default()).unwrap();
        for p in m.parameters_mut() {
            p.data_mut().fill(0.0);
        }
        let data = generate_synthetic(&SynthConfig::default(), &ClassVocab::default()).unwrap();
        let scores = m.predict_scores(&data.subset(&[0, 15])).unwrap();
        for row in scores.rows() {
            for &v in row {
                assert!((v - 1.0 / 7.0).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn duplicated_samples_score_identically() {
        let data = small_data(1);
        let m = Model::build(&small_cfg()).unwrap();
        let scores = m.predict_scores(&data.subset(&[2, 2, 2])).unwrap();
        assert_eq!(scores.row(0), scores.row(1));
        assert_eq!(scores.row(1), scores.row(2));
        assert_eq!(m.predict_scores(&data).unwrap(), m.predict_scores(&data).unwrap());
    }

    #[test]
    fn predict_rejects_wrong_shape() {
        let data = small_data(1);
        let m = Model::build(&ModelConfig::default()).unwrap();
        assert!(matches!(m.predict_scores(&data), Err(ModelError::InputShape { .. })));
    }
}
