//! Compare analytic gradients of a conv -> relu -> pool -> dense -> softmax
//! stack against central finite differences.

use std::error::Error;

use mcnn::ops;
use mcnn::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn loss(x: &Tensor, k: &Tensor, kb: &Tensor, w: &Tensor, wb: &Tensor, target: &Tensor) -> f64 {
    let conv = ops::conv2d_forward(x, k, kb).unwrap();
    let (pooled, _) = ops::maxpool2_forward(&ops::relu_forward(&conv)).unwrap();
    let flat = Tensor::from_vec(pooled.data().to_vec());
    let scores = ops::softmax(&ops::dense_forward(&flat, w, wb).unwrap()).unwrap();
    ops::cross_entropy_loss(&scores, target).unwrap().0
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random(&mut rng, &[1, 6, 6]);
    let k = random(&mut rng, &[2, 1, 3, 3]);
    let kb = random(&mut rng, &[2]);
    let w = random(&mut rng, &[3, 8]);
    let wb = random(&mut rng, &[3]);
    let target = Tensor::from_vec(vec![0.0, 1.0, 0.0]);

    // forward with saved intermediates
    let conv = ops::conv2d_forward(&x, &k, &kb)?;
    let act = ops::relu_forward(&conv);
    let (pooled, idx) = ops::maxpool2_forward(&act)?;
    let flat = Tensor::from_vec(pooled.data().to_vec());
    let scores = ops::softmax(&ops::dense_forward(&flat, &w, &wb)?)?;
    let (_, d_logits) = ops::cross_entropy_loss(&scores, &target)?;

    // backward
    let dense = ops::dense_backward(&flat, &w, &wb, &d_logits)?;
    let d_pooled = Tensor::new(pooled.shape().to_vec(), dense.input_grad.data().to_vec())?;
    let d_act = ops::maxpool2_backward(&idx, &d_pooled, act.shape())?;
    let d_conv = ops::relu_backward(&conv, &d_act)?;
    let analytic = ops::conv2d_backward(&x, &k, &kb, &d_conv)?.param_grads[0].clone();

    let h = 1e-2f32;
    let mut worst = 0f64;
    for i in 0..k.len() {
        let (mut plus, mut minus) = (k.clone(), k.clone());
        plus.data_mut()[i] += h;
        minus.data_mut()[i] -= h;
        let step = (plus.data()[i] as f64) - (minus.data()[i] as f64);
        let numeric = (loss(&x, &plus, &kb, &w, &wb, &target) - loss(&x, &minus, &kb, &w, &wb, &target)) / step;
        worst = worst.max((numeric - analytic.data()[i] as f64).abs());
    }
    println!("kernel gradient: max abs deviation from finite differences {worst:.2e}");
    assert!(worst < 1e-2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
