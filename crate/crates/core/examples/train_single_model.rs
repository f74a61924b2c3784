//! Train one member network on synthetic data and report its loss curve.

use std::error::Error;

use mcnn::data::{generate_synthetic, split, ClassVocab, SynthConfig};
use mcnn::optim::SgdConfig;
use mcnn::{Model, ModelConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let synth = SynthConfig { samples_per_class: 16, image_size: (16, 16), noise_sigma: 0.2, ..SynthConfig::default() };
    let data = generate_synthetic(&synth, &ClassVocab::default())?;
    let (train, val, _) = split(&data, [0.75, 0.25, 0.0], 1)?;

    let mut model = Model::build(&ModelConfig { input_shape: (1, 16, 16), ..ModelConfig::default() })?;
    println!("{} parameters", model.param_count());
    let report = model.train(&train, 8, 16, &SgdConfig::default(), 1)?;
    for (epoch, loss) in report.epoch_losses.iter().enumerate() {
        println!("epoch {}\tloss {loss:.4}", epoch + 1);
    }

    let scores = model.predict_scores(&val)?;
    let correct = val
        .iter()
        .zip(scores.rows())
        .filter(|(s, row)| row.iter().all(|&p| p <= row[s.label]))
        .count();
    println!("train accuracy {:.3}, val accuracy {:.3}", report.train_accuracy, correct as f64 / val.len() as f64);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
