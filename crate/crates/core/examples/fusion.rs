//! Joint-argmax fusion: each sample takes the class holding the single
//! highest probability across all members.

use std::error::Error;

use mcnn::{fuse_predict, ScoreMatrix};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let ids = vec!["a".to_string(), "b".to_string(), "c".to_string()];
    let first = ScoreMatrix::new(ids.clone(), vec![vec![0.6, 0.3, 0.1], vec![0.5, 0.4, 0.1], vec![0.4, 0.4, 0.2]])?;
    let second = ScoreMatrix::new(ids.clone(), vec![vec![0.2, 0.7, 0.1], vec![0.1, 0.3, 0.6], vec![0.4, 0.2, 0.4]])?;

    println!("sample\tclass\tmodel\tscore");
    for (id, p) in ids.iter().zip(fuse_predict(&[first, second])?) {
        println!("{id}\t{}\t{}\t{:.2}", p.label, p.model + 1, p.score);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
