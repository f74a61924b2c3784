//! Multiple convolutional neural networks trained with additive
//! hard-sample selection.
//!
//! A first small CNN is trained briefly on the full training set. Every
//! later member starts from its predecessor's weights and trains on the
//! samples the predecessor scored below a confidence threshold. At
//! prediction time each sample takes the class of whichever member gives
//! it the single highest probability.
//!
//! The crate carries its own dense tensor math and backpropagation
//! ([`ops`], [`optim`]), the member network ([`model`]), the ensemble loop
//! and fusion rule ([`ensemble`]), ROC/AUC evaluation ([`eval`]), dataset
//! ingestion and a synthetic seven-class generator ([`data`]), and the
//! batch commands behind the `mcnn` binary ([`cli`]).
//!
//! ```no_run
//! use mcnn::data::{generate_synthetic, split, ClassVocab, SynthConfig};
//! use mcnn::ensemble::{train_mcnn, EnsembleConfig};
//! use mcnn::eval::evaluate;
//! use mcnn::model::ModelConfig;
//!
//! let data = generate_synthetic(&SynthConfig::default(), &ClassVocab::default()).unwrap();
//! let (train, val, _) = split(&data, [0.8, 0.1, 0.1], 42).unwrap();
//! let ensemble = train_mcnn(&train, &ModelConfig::default(), &EnsembleConfig::default(), 42).unwrap();
//! let summary = evaluate(&ensemble.fused_scores(&val).unwrap(), &val.labels()).unwrap();
//! println!("validation macro AUC {:?}", summary.macro_auc);
//! ```

pub mod cli;
pub mod data;
pub mod ensemble;
pub mod eval;
pub mod model;
pub mod ops;
pub mod optim;
pub mod scores;
pub mod tensor;

pub use ensemble::{fuse_predict, fuse_scores, train_mcnn, Ensemble, EnsembleConfig};
pub use model::{Model, ModelConfig};
pub use scores::ScoreMatrix;
pub use tensor::Tensor;
