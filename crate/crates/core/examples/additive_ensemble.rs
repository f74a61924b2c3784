//! Grow an ensemble by handing each model's low-confidence samples to a
//! warm-started successor, then compare member and fused accuracy.

use std::error::Error;

use mcnn::data::{generate_synthetic, split, ClassVocab, SynthConfig};
use mcnn::ensemble::{train_mcnn, EnsembleConfig, NextSetMode};
use mcnn::ModelConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let synth = SynthConfig { samples_per_class: 16, image_size: (16, 16), noise_sigma: 0.4, ..SynthConfig::default() };
    let data = generate_synthetic(&synth, &ClassVocab::default())?;
    let (train, val, _) = split(&data, [0.5, 0.5, 0.0], 3)?;

    let model = ModelConfig { input_shape: (1, 16, 16), ..ModelConfig::default() };
    let cfg = EnsembleConfig {
        max_models: 4,
        min_hard_set: 2,
        epochs_first: 2,
        epochs_rest: 4,
        next_set_mode: NextSetMode::FullPlusDuplicates,
        ..EnsembleConfig::default()
    };
    let ensemble = train_mcnn(&train, &model, &cfg, 3)?;

    println!("round\ttrain_size\tselected\tmean_top_score");
    for r in &ensemble.rounds {
        println!("{}\t{}\t{}\t{:.4}", r.round, r.train_size, r.report.selected_count(), r.report.mean_top_score());
    }

    let accuracy = |rows: &[Vec<f64>]| {
        let hits = val.iter().zip(rows).filter(|(s, row)| row.iter().all(|&p| p <= row[s.label])).count();
        hits as f64 / val.len() as f64
    };
    for (m, scores) in ensemble.member_scores(&val)?.iter().enumerate() {
        println!("model {} val accuracy {:.3}", m + 1, accuracy(scores.rows()));
    }
    println!("fused val accuracy {:.3}", accuracy(ensemble.fused_scores(&val)?.rows()));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
