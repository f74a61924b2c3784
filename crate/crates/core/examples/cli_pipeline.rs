//! The synth, train, eval and predict commands driven in-process, the same
//! way the `mcnn` binary runs them.

use std::error::Error;

use mcnn::cli::{cmd_eval, cmd_predict, cmd_synth, cmd_train, DataSource, ManifestSource, RunConfig, SynthSection};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let data = dir.path().join("data");
    let mut cfg = RunConfig {
        out: data.clone(),
        data: DataSource::Synth(SynthSection { image_size: (16, 16), noise_sigma: 0.2, ..SynthSection::default() }),
        ..RunConfig::default()
    };
    cfg.model.input_shape = (1, 16, 16);
    cfg.ensemble.max_models = 2;
    cfg.ensemble.min_hard_set = 1;
    cfg.ensemble.epochs_first = 2;
    cfg.ensemble.epochs_rest = 2;
    let mut stdout = std::io::stdout();
    cmd_synth(&cfg, &mut stdout)?;

    cfg.out = dir.path().join("ensemble");
    cfg.data = DataSource::Manifest(ManifestSource { path: data.join("train.csv"), image_dir: None });
    cmd_train(&cfg, &mut stdout)?;

    let summary = cmd_eval(&cfg.out, &data.join("val.csv"), None, &dir.path().join("eval"))?;
    println!("val accuracy {:.3}, macro auc {:?}", summary.accuracy, summary.macro_auc);
    let rows = cmd_predict(&cfg.out, &data.join("test.csv"), None, &dir.path().join("predictions.csv"))?;
    for row in rows.iter().take(3) {
        println!("{}\t{}\tmodel {}\t{:.3}", row.image, row.predicted_class, row.winning_model, row.winning_score);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
