//! Seeded synthetic stand-in for a dermoscopy collection: one parametric
//! grayscale shape per class with positional jitter and Gaussian noise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ClassVocab, DataError, Dataset, Sample};
use crate::tensor::Tensor;

/// Shape rendered for each class index, in vocabulary order.
pub const SHAPE_KINDS: [&str; 7] = [
    "disk",
    "ring",
    "bar",
    "cross",
    "checker",
    "gradient blob",
    "corner blob",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub samples_per_class: usize,
    /// `(height, width)`; both must be multiples of 4.
    pub image_size: (usize, usize),
    pub noise_sigma: f64,
    /// Maximum shape-centre offset as a fraction of the image side.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            samples_per_class: 10,
            image_size: (28, 28),
            noise_sigma: 0.0,
            jitter: 0.06,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        let (h, w) = self.image_size;
        if h == 0 || w == 0 || h % 4 != 0 || w % 4 != 0 {
            return Err(DataError::InvalidConfig(format!(
                "image_size {h}x{w} must be positive multiples of 4"
            )));
        }
        if self.samples_per_class == 0 {
            return Err(DataError::InvalidConfig("samples_per_class must be >= 1".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(DataError::InvalidConfig(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !(0.0..=0.2).contains(&self.jitter) {
            return Err(DataError::InvalidConfig(format!(
                "jitter must be in [0, 0.2], got {}",
                self.jitter
            )));
        }
        Ok(())
    }
}

/// Renders the noiseless shape for `class` into a `[1, H, W]` tensor.
/// `(dx, dy)` shift the shape centre in image-side units; `scale` resizes it.
pub fn render_template(class: usize, (h, w): (usize, usize), dx: f64, dy: f64, scale: f64) -> Tensor {
    let mut data = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let u = (x as f64 + 0.5) / w as f64;
            let v = (y as f64 + 0.5) / h as f64;
            data.push(shape_value(class, u - 0.5 - dx, v - 0.5 - dy, scale) as f32);
        }
    }
    Tensor::new(vec![1, h, w], data).expect("shape matches data")
}

/// Intensity in [0, 1] at offset `(px, py)` from the (jittered) centre.
fn shape_value(class: usize, px: f64, py: f64, s: f64) -> f64 {
    let r = (px * px + py * py).sqrt();
    let on = |b: bool| if b { 1.0 } else { 0.0 };
    match class % SHAPE_KINDS.len() {
        0 => on(r < 0.28 * s),
        1 => on(r > 0.18 * s && r < 0.34 * s),
        2 => on(py.abs() < 0.09 * s && px.abs() < 0.38 * s),
        3 => on((px.abs() < 0.07 * s && py.abs() < 0.36 * s)
            || (py.abs() < 0.07 * s && px.abs() < 0.36 * s)),
        4 => {
            let cell = 0.25 * s;
            let (cx, cy) = ((px / cell).floor() as i64, (py / cell).floor() as i64);
            on((cx + cy).rem_euclid(2) == 0)
        }
        5 => (1.0 - r / (0.42 * s)).max(0.0),
        _ => {
            let (qx, qy) = (px + 0.25, py + 0.25);
            on((qx * qx + qy * qy).sqrt() < 0.2 * s)
        }
    }
}

/// Generates `samples_per_class` samples for each class, class-major, with
/// ids `synth_<CODE>_<k>`.
pub fn generate_synthetic(cfg: &SynthConfig, vocab: &ClassVocab) -> Result<Dataset, DataError> {
    cfg.validate()?;
    if vocab.len() > SHAPE_KINDS.len() {
        return Err(DataError::InvalidConfig(format!(
            "synthetic generator supports at most {} classes, vocabulary has {}",
            SHAPE_KINDS.len(),
            vocab.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sigma.max(f64::MIN_POSITIVE))
        .expect("sigma validated");
    let mut samples = Vec::with_capacity(vocab.len() * cfg.samples_per_class);
    for class in 0..vocab.len() {
        for k in 0..cfg.samples_per_class {
            let dx = rng.random_range(-cfg.jitter..=cfg.jitter);
            let dy = rng.random_range(-cfg.jitter..=cfg.jitter);
            let scale = rng.random_range(0.9..=1.1);
            let mut image = render_template(class, cfg.image_size, dx, dy, scale);
            if cfg.noise_sigma > 0.0 {
                for v in image.data_mut() {
                    *v = (*v as f64 + noise.sample(&mut rng)).clamp(0.0, 1.0) as f32;
                }
            }
            samples.push(Sample {
                id: format!("synth_{}_{k}", vocab.code(class)),
                image,
                label: class,
            });
        }
    }
    Dataset::new(samples, vocab.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_ids() {
        let d = generate_synthetic(&SynthConfig::default(), &ClassVocab::default()).unwrap();
        assert_eq!(d.len(), 70);
        assert_eq!(d.class_counts(), vec![10; 7]);
        assert_eq!(d.get(0).id, "synth_MEL_0");
        assert_eq!(d.get(69).id, "synth_VASC_9");
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig { noise_sigma: 0.2, ..SynthConfig::default() };
        let a = generate_synthetic(&cfg, &ClassVocab::default()).unwrap();
        let b = generate_synthetic(&cfg, &ClassVocab::default()).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!(x.image.bitwise_eq(&y.image));
        }
    }

    #[test]
    fn pixels_in_unit_range() {
        let cfg = SynthConfig { noise_sigma: 0.5, ..SynthConfig::default() };
        let d = generate_synthetic(&cfg, &ClassVocab::default()).unwrap();
        assert!(d.iter().all(|s| s.image.data().iter().all(|v| (0.0..=1.0).contains(v))));
    }

    #[test]
    fn rejects_sizes_not_multiple_of_four() {
        let cfg = SynthConfig { image_size: (30, 28), ..SynthConfig::default() };
        assert!(generate_synthetic(&cfg, &ClassVocab::default()).is_err());
    }

    /// Nearest-centroid classification over the noiseless samples.
    #[test]
    fn noiseless_classes_are_centroid_separable() {
        let d = generate_synthetic(&SynthConfig::default(), &ClassVocab::default()).unwrap();
        let n = d.get(0).image.len();
        let mut centroids = vec![vec![0f64; n]; 7];
        for s in d.iter() {
            for (c, &v) in centroids[s.label].iter_mut().zip(s.image.data()) {
                *c += v as f64 / 10.0;
            }
        }
        for s in d.iter() {
            let nearest = (0..7)
                .min_by(|&a, &b| {
                    let da: f64 = centroids[a].iter().zip(s.image.data()).map(|(c, &v)| (c - v as f64).powi(2)).sum();
                    let db: f64 = centroids[b].iter().zip(s.image.data()).map(|(c, &v)| (c - v as f64).powi(2)).sum();
                    da.total_cmp(&db)
                })
                .unwrap();
            assert_eq!(nearest, s.label, "{}", s.id);
        }
    }
}
