//! One-vs-rest ROC curves and AUC for a hand-made score matrix.

use std::error::Error;

use mcnn::data::{ClassVocab, Labels};
use mcnn::eval::{auc_mann_whitney, evaluate, roc_csv};
use mcnn::ScoreMatrix;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let vocab = ClassVocab::from_codes(&["A", "B", "C"])?;
    let rows = vec![
        vec![0.7, 0.2, 0.1],
        vec![0.4, 0.4, 0.2],
        vec![0.2, 0.5, 0.3],
        vec![0.1, 0.8, 0.1],
        vec![0.3, 0.3, 0.4],
        vec![0.1, 0.2, 0.7],
    ];
    let ids: Vec<String> = (0..rows.len()).map(|i| format!("x{i}")).collect();
    let labels = Labels { ids: ids.clone(), classes: vec![0, 1, 0, 1, 2, 2] };
    let scores = ScoreMatrix::new(ids, rows)?;

    let summary = evaluate(&scores, &labels)?;
    for (class, auc) in summary.per_class_auc.iter().enumerate() {
        let rank = auc_mann_whitney(&scores.column(class), &labels.classes, class)?;
        println!("{}\tauc {:?}\trank-sum {rank:.4}", vocab.code(class), auc);
    }
    println!("macro auc {:?}, accuracy {:.3}", summary.macro_auc, summary.accuracy);
    print!("{}", roc_csv(&summary.curves[0]));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
