mod common;

use std::collections::BTreeSet;

use common::*;
use mcnn::data::{load_manifest, netpbm, split, write_manifest, ClassVocab, Dataset, Labels, Sample};
use mcnn::ensemble::{fuse_predict, select_additive_samples, EnsembleConfig, SelectionPredicate};
use mcnn::eval::{auc_pairwise, roc_from_column};
use mcnn::model::ConvBlock;
use mcnn::ops;
use mcnn::{Model, ModelConfig, ScoreMatrix, Tensor};
use proptest::prelude::*;

fn prob_row(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..20, k).prop_map(|w| {
        let total: u32 = w.iter().sum();
        if total == 0 {
            vec![1.0 / w.len() as f64; w.len()]
        } else {
            w.iter().map(|&x| x as f64 / total as f64).collect()
        }
    })
}

fn matrix(rows: &[Vec<f64>]) -> ScoreMatrix {
    ScoreMatrix::new((0..rows.len()).map(|i| format!("p{i}")).collect(), rows.to_vec()).unwrap()
}

fn binary_case() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..80).prop_flat_map(|n| {
        (
            prop::collection::vec((0u32..12).prop_map(|v| v as f64 / 11.0), n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(s, mut p)| {
                p[0] = true;
                p[1] = false;
                (s, p)
            })
    })
}

proptest! {
    #[test]
    fn softmax_is_a_distribution(z in prop::collection::vec(-80.0f32..80.0, 2..16)) {
        let p = ops::softmax(&Tensor::from_vec(z)).unwrap();
        let sum: f64 = p.data().iter().map(|&v| v as f64).sum();
        prop_assert!((sum - 1.0).abs() < 1e-6);
        prop_assert!(p.data().iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn softmax_ignores_constant_shift(z in prop::collection::vec(-5.0f32..5.0, 2..10), c in -5.0f32..5.0) {
        let a = ops::softmax(&Tensor::from_vec(z.clone())).unwrap();
        let b = ops::softmax(&Tensor::from_vec(z.iter().map(|v| v + c).collect())).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            prop_assert!((x - y).abs() < 1e-5);
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform((scores, positive) in binary_case()) {
        let base = roc_from_column(&scores, &positive, 0).unwrap().auc;
        let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
        prop_assert_eq!(roc_from_column(&warped, &positive, 0).unwrap().auc, base);
    }

    #[test]
    fn auc_flips_when_labels_swap((scores, positive) in binary_case()) {
        let base = roc_from_column(&scores, &positive, 0).unwrap().auc;
        let swapped: Vec<bool> = positive.iter().map(|b| !b).collect();
        let flipped = roc_from_column(&scores, &swapped, 0).unwrap().auc;
        prop_assert!((base + flipped - 1.0).abs() < 1e-12);
        prop_assert!((auc_pairwise(&scores, &positive).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn fused_score_dominates_every_member(
        per_model in (1usize..5, 1usize..20).prop_flat_map(|(m, n)| {
            prop::collection::vec(prop::collection::vec(prob_row(7), n), m)
        })
    ) {
        let matrices: Vec<ScoreMatrix> = per_model.iter().map(|rows| matrix(rows)).collect();
        let fused = fuse_predict(&matrices).unwrap();
        for (i, f) in fused.iter().enumerate() {
            prop_assert_eq!(f.score, per_model[f.model][i][f.label]);
            for rows in &per_model {
                prop_assert!(rows[i].iter().all(|&v| v <= f.score));
            }
        }
    }

    #[test]
    fn fusion_commutes_with_sample_permutation(
        (per_model, perm) in (1usize..4, 2usize..15).prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(prop::collection::vec(prob_row(7), n), m),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
        })
    ) {
        let fused = fuse_predict(&per_model.iter().map(|r| matrix(r)).collect::<Vec<_>>()).unwrap();
        let permuted: Vec<ScoreMatrix> = per_model
            .iter()
            .map(|rows| matrix(&perm.iter().map(|&p| rows[p].clone()).collect::<Vec<_>>()))
            .collect();
        let fused_perm = fuse_predict(&permuted).unwrap();
        for (j, &p) in perm.iter().enumerate() {
            prop_assert_eq!(fused_perm[j], fused[p]);
        }
    }

    #[test]
    fn raising_the_threshold_never_deselects(
        rows in prop::collection::vec(prob_row(7), 1..40),
        t1 in 0.05f64..1.0,
        t2 in 0.05f64..1.0,
        wrong_too in any::<bool>(),
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let labels = Labels {
            ids: (0..rows.len()).map(|i| format!("p{i}")).collect(),
            classes: (0..rows.len()).map(|i| i % 7).collect(),
        };
        let predicate = if wrong_too { SelectionPredicate::ScoreOrWrong } else { SelectionPredicate::ScoreOnly };
        let scores = matrix(&rows);
        let pick = |threshold| {
            let cfg = EnsembleConfig { threshold, selection_predicate: predicate, ..EnsembleConfig::default() };
            select_additive_samples(&scores, &labels, &cfg).unwrap()
        };
        let (low, high) = (pick(lo), pick(hi));
        for (a, b) in low.entries.iter().zip(&high.entries) {
            prop_assert!(!a.selected || b.selected);
        }
    }

    #[test]
    fn split_is_a_stratified_partition(
        labels in prop::collection::vec(0usize..7, 1..120),
        train in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let val = (1.0 - train) / 2.0;
        let data = tiny_dataset(&labels);
        let (a, b, c) = split(&data, [train, val, 1.0 - train - val], seed).unwrap();
        let mut all: Vec<String> = a.ids();
        all.extend(b.ids());
        all.extend(c.ids());
        prop_assert_eq!(all.len(), data.len());
        let unique: BTreeSet<&String> = all.iter().collect();
        prop_assert_eq!(unique.len(), data.len());
        for class in 0..7 {
            let n = labels.iter().filter(|&&l| l == class).count();
            let expect = ((n as f64 * train).round() as usize).min(n);
            prop_assert_eq!(a.class_counts()[class], expect);
        }
    }

    #[test]
    fn manifest_round_trip(labels in prop::collection::vec(0usize..7, 1..20), seed in any::<u64>()) {
        let tmp = tempfile::tempdir().unwrap();
        let mut r = rng(seed);
        let samples: Vec<Sample> = labels
            .iter()
            .enumerate()
            .map(|(i, &label)| {
                let image = random_tensor(&mut r, &[1, 4, 4], 0.0, 1.0);
                let image = netpbm::decode(&netpbm::encode(&image).unwrap()).unwrap();
                Sample { id: format!("img_{i}"), image, label }
            })
            .collect();
        for s in &samples {
            netpbm::save_image(&tmp.path().join(format!("{}.pgm", s.id)), &s.image).unwrap();
        }
        let data = Dataset::new(samples, ClassVocab::default()).unwrap();
        let csv = tmp.path().join("m.csv");
        write_manifest(&csv, &data).unwrap();
        let back = load_manifest(&csv, tmp.path(), &ClassVocab::default()).unwrap();
        prop_assert_eq!(back.labels(), data.labels());
        for (x, y) in back.iter().zip(data.iter()) {
            prop_assert_eq!(&x.image, &y.image);
        }
    }

    #[test]
    fn netpbm_round_trip(c in prop::sample::select(vec![1usize, 3]), h in 1usize..9, w in 1usize..9, bytes in prop::collection::vec(any::<u8>(), 243)) {
        let data: Vec<f32> = bytes[..c * h * w].iter().map(|&b| b as f32 / 255.0).collect();
        let t = Tensor::new(vec![c, h, w], data).unwrap();
        let back = netpbm::decode(&netpbm::encode(&t).unwrap()).unwrap();
        prop_assert_eq!(back, t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn model_bytes_round_trip(
        seed in any::<u64>(),
        channels in 1usize..3,
        width in 1usize..5,
        hidden in prop::option::of(1usize..8),
        same in any::<bool>(),
    ) {
        let side = if same { 8 } else { 10 };
        let cfg = ModelConfig {
            input_shape: (channels, side, side),
            conv_blocks: vec![ConvBlock { out_channels: width, kernel_size: 3 }],
            same_padding: same,
            hidden_dense: hidden,
            num_classes: 7,
            seed,
        };
        let model = Model::build(&cfg).unwrap();
        let back = Model::from_bytes(&model.to_bytes()).unwrap();
        prop_assert_eq!(back.config(), model.config());
        prop_assert!(back.same_parameters(&model));
        prop_assert_eq!(back.to_bytes(), model.to_bytes());
    }
}
