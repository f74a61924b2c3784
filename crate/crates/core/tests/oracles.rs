mod common;

use common::*;
use mcnn::ops;
use mcnn::Tensor;
use rand::Rng;

#[test]
fn conv_matches_direct_loops() {
    let mut r = rng(11);
    for case in 0..60 {
        let c = r.random_range(1..=4);
        let (h, w) = (r.random_range(1..=16), r.random_range(1..=16));
        let o = r.random_range(1..=4);
        let (kh, kw) = (r.random_range(1..=h.min(5)), r.random_range(1..=w.min(5)));
        let x = random_tensor(&mut r, &[c, h, w], -1.0, 1.0);
        let k = random_tensor(&mut r, &[o, c, kh, kw], -1.0, 1.0);
        let b = random_tensor(&mut r, &[o], -1.0, 1.0);
        let out = ops::conv2d_forward(&x, &k, &b).unwrap();
        assert_eq!(out.shape(), [o, h - kh + 1, w - kw + 1], "case {case}");
        for (got, want) in out.data().iter().zip(conv_oracle(&x, &k, &b)) {
            assert!((*got as f64 - want).abs() <= 1e-6 * want.abs().max(1.0), "case {case}: {got} vs {want}");
        }
    }
}

#[test]
fn conv_at_full_size() {
    let mut r = rng(12);
    let x = random_tensor(&mut r, &[4, 16, 16], 0.0, 1.0);
    let k = random_tensor(&mut r, &[8, 4, 3, 3], -0.5, 0.5);
    let b = random_tensor(&mut r, &[8], -0.1, 0.1);
    let out = ops::conv2d_forward(&x, &k, &b).unwrap();
    let worst = out
        .data()
        .iter()
        .zip(conv_oracle(&x, &k, &b))
        .map(|(&g, w)| (g as f64 - w).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "max deviation {worst}");
}

#[test]
fn maxpool_matches_brute_force() {
    let mut r = rng(13);
    for case in 0..100 {
        let shape = [r.random_range(1..=3), 2 * r.random_range(1..=6), 2 * r.random_range(1..=6)];
        // few levels so windows often tie
        let n = shape.iter().product();
        let data: Vec<f32> = (0..n).map(|_| r.random_range(0..4) as f32).collect();
        let x = Tensor::new(shape.to_vec(), data).unwrap();
        let (pooled, idx) = ops::maxpool2_forward(&x).unwrap();
        let (vals, want_idx) = pool_oracle(&x);
        assert_eq!(pooled.data(), vals.as_slice(), "case {case}");
        assert_eq!(idx, want_idx, "case {case}");
    }
}

#[test]
fn maxpool_backward_scatters_to_argmax() {
    let mut r = rng(14);
    let x = random_tensor(&mut r, &[2, 4, 6], -1.0, 1.0);
    let (pooled, idx) = ops::maxpool2_forward(&x).unwrap();
    let up = random_tensor(&mut r, pooled.shape(), -1.0, 1.0);
    let dx = ops::maxpool2_backward(&idx, &up, x.shape()).unwrap();
    let mut want = vec![0f32; x.len()];
    for (&i, &g) in idx.iter().zip(up.data()) {
        want[i] += g;
    }
    assert_eq!(dx.data(), want.as_slice());
}

#[test]
fn softmax_rows_are_distributions() {
    let mut r = rng(15);
    for _ in 0..200 {
        let k = r.random_range(2..=12);
        let z = random_tensor(&mut r, &[k], -50.0, 50.0);
        let p = ops::softmax(&z).unwrap();
        let sum: f64 = p.data().iter().map(|&v| v as f64).sum();
        assert!((sum - 1.0).abs() < 1e-6, "sum {sum}");
        assert!(p.data().iter().all(|&v| v > 0.0 && v < 1.0));
    }
}
