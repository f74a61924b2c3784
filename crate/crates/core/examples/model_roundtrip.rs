//! Save a trained model to disk and check the reload is bit-identical.

use std::error::Error;

use mcnn::data::{generate_synthetic, ClassVocab, SynthConfig};
use mcnn::optim::SgdConfig;
use mcnn::{Model, ModelConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data = generate_synthetic(
        &SynthConfig { samples_per_class: 4, image_size: (12, 12), ..SynthConfig::default() },
        &ClassVocab::default(),
    )?;
    let mut model = Model::build(&ModelConfig { input_shape: (1, 12, 12), ..ModelConfig::default() })?;
    model.train(&data, 1, 8, &SgdConfig::default(), 0)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("model.mcnn");
    model.save(&path)?;
    let back = Model::load(&path)?;
    println!("{} bytes on disk", std::fs::metadata(&path)?.len());
    assert!(back.same_parameters(&model));
    assert_eq!(back.predict_scores(&data)?, model.predict_scores(&data)?);
    println!("reloaded model matches bit for bit");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
