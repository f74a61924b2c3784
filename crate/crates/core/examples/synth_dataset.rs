//! Generate the seven-class synthetic dataset, split it and write it to disk
//! as PGM images plus CSV manifests.

use std::error::Error;

use mcnn::data::{generate_synthetic, load_manifest, split, write_manifest, ClassVocab, SynthConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let vocab = ClassVocab::default();
    let cfg = SynthConfig { samples_per_class: 12, image_size: (16, 16), noise_sigma: 0.1, ..SynthConfig::default() };
    let data = generate_synthetic(&cfg, &vocab)?;
    let (train, val, test) = split(&data, [0.5, 0.25, 0.25], cfg.seed)?;

    let dir = tempfile::tempdir()?;
    for sample in data.iter() {
        mcnn::data::netpbm::save_image(&dir.path().join(format!("{}.pgm", sample.id)), &sample.image)?;
    }
    for (name, part) in [("train", &train), ("val", &val), ("test", &test)] {
        write_manifest(&dir.path().join(format!("{name}.csv")), part)?;
    }

    let back = load_manifest(&dir.path().join("train.csv"), dir.path(), &vocab)?;
    assert_eq!(back.labels(), train.labels());
    for (code, n) in vocab.codes().iter().zip(data.class_counts()) {
        println!("{code}\t{n}");
    }
    println!("split {} / {} / {}", train.len(), val.len(), test.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
