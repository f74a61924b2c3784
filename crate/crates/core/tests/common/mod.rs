//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use mcnn::data::{ClassVocab, Dataset, Sample};
use mcnn::ensemble::{Classifier, SelectionPredicate};
use mcnn::model::{ModelError, TrainReport};
use mcnn::optim::SgdConfig;
use mcnn::{ScoreMatrix, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize], lo: f32, hi: f32) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// `||a - b|| / max(||a||, ||b||)`, zero when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Central differences of `f` with respect to every element of `inputs[which]`.
pub fn numeric_gradient(f: &dyn Fn(&[Tensor]) -> f64, inputs: &[Tensor], which: usize, h: f32) -> Vec<f64> {
    let mut work = inputs.to_vec();
    (0..inputs[which].len())
        .map(|i| {
            let x = inputs[which].data()[i];
            let (xp, xm) = (x + h, x - h);
            work[which].data_mut()[i] = xp;
            let fp = f(&work);
            work[which].data_mut()[i] = xm;
            let fm = f(&work);
            work[which].data_mut()[i] = x;
            (fp - fm) / (xp as f64 - xm as f64)
        })
        .collect()
}

pub fn as_f64(t: &Tensor) -> Vec<f64> {
    t.data().iter().map(|&v| v as f64).collect()
}

/// `sum(r * t)` in f64.
pub fn project(t: &Tensor, r: &Tensor) -> f64 {
    t.data().iter().zip(r.data()).map(|(&a, &b)| a as f64 * b as f64).sum()
}

/// Direct-loop valid cross-correlation.
pub fn conv_oracle(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Vec<f64> {
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (o, kh, kw) = (kernels.shape()[0], kernels.shape()[2], kernels.shape()[3]);
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let x = |ci: usize, y: usize, xx: usize| input.data()[(ci * h + y) * w + xx] as f64;
    let k = |oi: usize, ci: usize, i: usize, j: usize| kernels.data()[((oi * c + ci) * kh + i) * kw + j] as f64;
    let mut out = Vec::with_capacity(o * oh * ow);
    for oi in 0..o {
        for y in 0..oh {
            for xx in 0..ow {
                let mut s = bias.data()[oi] as f64;
                for ci in 0..c {
                    for i in 0..kh {
                        for j in 0..kw {
                            s += k(oi, ci, i, j) * x(ci, y + i, xx + j);
                        }
                    }
                }
                out.push(s);
            }
        }
    }
    out
}

/// 2x2 max-pool by scanning each window; returns values and flat argmax
/// indices (first maximum in row-major window order).
pub fn pool_oracle(input: &Tensor) -> (Vec<f32>, Vec<usize>) {
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let mut vals = Vec::new();
    let mut idx = Vec::new();
    for ci in 0..c {
        for y in 0..h / 2 {
            for x in 0..w / 2 {
                let cands = [
                    (ci * h + 2 * y) * w + 2 * x,
                    (ci * h + 2 * y) * w + 2 * x + 1,
                    (ci * h + 2 * y + 1) * w + 2 * x,
                    (ci * h + 2 * y + 1) * w + 2 * x + 1,
                ];
                let max = cands.iter().map(|&i| input.data()[i]).fold(f32::NEG_INFINITY, f32::max);
                let first = *cands.iter().find(|&&i| input.data()[i] == max).unwrap();
                vals.push(max);
                idx.push(first);
            }
        }
    }
    (vals, idx)
}

/// Mann-Whitney AUC via mid-ranks of the pooled scores.
pub fn rank_sum_auc(scores: &[f64], positive: &[bool]) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut ranks = vec![0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mid;
        }
        i = j + 1;
    }
    let p = positive.iter().filter(|&&b| b).count() as f64;
    let n = scores.len() as f64 - p;
    let r: f64 = ranks.iter().zip(positive).filter(|(_, &b)| b).map(|(r, _)| r).sum();
    (r - p * (p + 1.0) / 2.0) / (p * n)
}

pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        area += (w[1].0 - w[0].0) * (w[0].1 + w[1].1) * 0.5;
    }
    area
}

/// Selection flags computed from first principles.
pub fn select_oracle(rows: &[Vec<f64>], truth: &[usize], threshold: f64, predicate: SelectionPredicate) -> Vec<bool> {
    rows.iter()
        .zip(truth)
        .map(|(row, &t)| {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let predicted = row.iter().position(|&v| v == max).unwrap();
            let low = max < threshold;
            match predicate {
                SelectionPredicate::ScoreOnly => low,
                SelectionPredicate::ScoreOrWrong => low || predicted != t,
            }
        })
        .collect()
}

/// `(label, model, score)` per sample: the lexicographically smallest
/// `(model, class)` among all entries equal to the global maximum.
pub fn fuse_oracle(models: &[Vec<Vec<f64>>]) -> Vec<(usize, usize, f64)> {
    (0..models[0].len())
        .map(|i| {
            let mut all: Vec<(usize, usize, f64)> = Vec::new();
            for (m, rows) in models.iter().enumerate() {
                for (c, &v) in rows[i].iter().enumerate() {
                    all.push((m, c, v));
                }
            }
            let max = all.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max);
            let (m, c, v) = all.into_iter().filter(|t| t.2 == max).min_by_key(|t| (t.0, t.1)).unwrap();
            (c, m, v)
        })
        .collect()
}

/// Dataset of constant `1x4x4` images with the given labels, ids `s0, s1, ...`.
pub fn tiny_dataset(labels: &[usize]) -> Dataset {
    let samples = labels
        .iter()
        .enumerate()
        .map(|(i, &label)| Sample {
            id: format!("s{i}"),
            image: Tensor::full(&[1, 4, 4], (i % 10) as f32 / 10.0),
            label,
        })
        .collect();
    Dataset::new(samples, ClassVocab::default()).unwrap()
}

pub type ScoreRule = Arc<dyn Fn(usize, &Sample) -> Vec<f64> + Send + Sync>;

/// A classifier whose scores are a fixed function of its generation and
/// the sample. Records what it was trained on.
#[derive(Clone)]
pub struct MockClassifier {
    pub generation: usize,
    pub rule: ScoreRule,
    pub fitted_on: Vec<String>,
}

impl MockClassifier {
    pub fn new(rule: ScoreRule) -> Self {
        MockClassifier { generation: 0, rule, fitted_on: Vec::new() }
    }
}

impl Classifier for MockClassifier {
    fn fit(&mut self, data: &Dataset, epochs: usize, _: usize, _: &SgdConfig, _: u64) -> Result<TrainReport, ModelError> {
        self.fitted_on = data.ids();
        Ok(TrainReport { epochs_run: epochs, epoch_losses: vec![0.0; epochs], train_accuracy: 0.0 })
    }

    fn predict_scores(&self, data: &Dataset) -> Result<ScoreMatrix, ModelError> {
        let rows = data.iter().map(|s| (self.rule)(self.generation, s)).collect();
        Ok(ScoreMatrix::new(data.ids(), rows)?)
    }

    fn warm_start(&self) -> Self {
        MockClassifier { generation: self.generation + 1, rule: Arc::clone(&self.rule), fitted_on: Vec::new() }
    }
}

/// A probability row over `k` classes built from integer weights, so equal
/// weights give exactly equal entries.
pub fn quantized_row(rng: &mut ChaCha8Rng, k: usize, levels: u32) -> Vec<f64> {
    let weights: Vec<u32> = (0..k).map(|_| rng.random_range(0..levels)).collect();
    let total: u32 = weights.iter().sum();
    if total == 0 {
        return vec![1.0 / k as f64; k];
    }
    weights.iter().map(|&w| w as f64 / total as f64).collect()
}

pub fn random_row(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0f64).powi(3) + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Row with `top` on `class` and the rest spread evenly.
pub fn peaked_row(k: usize, class: usize, top: f64) -> Vec<f64> {
    let rest = (1.0 - top) / (k - 1) as f64;
    (0..k).map(|c| if c == class { top } else { rest }).collect()
}
