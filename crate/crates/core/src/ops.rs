//! Forward and backward passes for the layer kinds used by the micro-CNN.
//!
//! Every forward function is pure. Backward functions take the same inputs
//! as their forward counterpart plus the upstream gradient of a scalar
//! objective with respect to the forward output.
//!
//! Convolution and dense products accumulate in `f64` and round once per
//! output element.

use crate::tensor::{Tensor, TensorError};

/// Gradients produced by a parameterised layer's backward pass.
///
/// `param_grads` follows the parameter order of the forward function
/// (e.g. kernels then bias for a convolution).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub param_grads: Vec<Tensor>,
    pub input_grad: Tensor,
}

struct ConvDims {
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
    kh: usize,
    kw: usize,
    oh: usize,
    ow: usize,
}

fn conv_dims(
    op: &'static str,
    input: &Tensor,
    kernels: &Tensor,
    bias: &Tensor,
) -> Result<ConvDims, TensorError> {
    input.expect_rank(op, 3)?;
    kernels.expect_rank(op, 4)?;
    bias.expect_rank(op, 1)?;
    let (c_in, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (c_out, kc, kh, kw) = (
        kernels.shape()[0],
        kernels.shape()[1],
        kernels.shape()[2],
        kernels.shape()[3],
    );
    if kc != c_in {
        return Err(TensorError::mismatch(op, "input channels", kc, c_in));
    }
    if bias.shape()[0] != c_out {
        return Err(TensorError::mismatch(
            op,
            "bias length",
            c_out,
            bias.shape()[0],
        ));
    }
    if kh > h {
        return Err(TensorError::mismatch(
            op,
            "height",
            format!(">= {kh}"),
            h,
        ));
    }
    if kw > w {
        return Err(TensorError::mismatch(op, "width", format!(">= {kw}"), w));
    }
    Ok(ConvDims {
        c_in,
        h,
        w,
        c_out,
        kh,
        kw,
        oh: h - kh + 1,
        ow: w - kw + 1,
    })
}

/// Valid-padding 2-D cross-correlation.
///
/// `input` is `[C_in, H, W]`, `kernels` is `[C_out, C_in, kH, kW]` and
/// `bias` is `[C_out]`; the result is `[C_out, H-kH+1, W-kW+1]`.
pub fn conv2d_forward(
    input: &Tensor,
    kernels: &Tensor,
    bias: &Tensor,
) -> Result<Tensor, TensorError> {
    let d = conv_dims("conv2d_forward", input, kernels, bias)?;
    let x = input.data();
    let k = kernels.data();
    let plane = d.oh * d.ow;
    let mut out = vec![0f32; d.c_out * plane];
    let mut acc = vec![0f64; plane];
    for o in 0..d.c_out {
        acc.fill(bias.data()[o] as f64);
        for c in 0..d.c_in {
            let x_plane = &x[c * d.h * d.w..(c + 1) * d.h * d.w];
            for i in 0..d.kh {
                for j in 0..d.kw {
                    let wt = k[((o * d.c_in + c) * d.kh + i) * d.kw + j] as f64;
                    for y in 0..d.oh {
                        let src = &x_plane[(y + i) * d.w + j..(y + i) * d.w + j + d.ow];
                        let dst = &mut acc[y * d.ow..(y + 1) * d.ow];
                        for (a, &v) in dst.iter_mut().zip(src) {
                            *a += wt * v as f64;
                        }
                    }
                }
            }
        }
        for (dst, &a) in out[o * plane..(o + 1) * plane].iter_mut().zip(&acc) {
            *dst = a as f32;
        }
    }
    Tensor::new(vec![d.c_out, d.oh, d.ow], out)
}

/// Gradients of [`conv2d_forward`] with respect to kernels, bias and input.
///
/// `param_grads` is `[d_kernels, d_bias]`.
pub fn conv2d_backward(
    input: &Tensor,
    kernels: &Tensor,
    bias: &Tensor,
    upstream: &Tensor,
) -> Result<LayerGrads, TensorError> {
    const OP: &str = "conv2d_backward";
    let d = conv_dims(OP, input, kernels, bias)?;
    upstream.expect_shape(OP, "upstream", &[d.c_out, d.oh, d.ow])?;
    let x = input.data();
    let k = kernels.data();
    let g = upstream.data();
    let plane = d.oh * d.ow;

    let mut dk = vec![0f64; kernels.len()];
    let mut db = vec![0f64; d.c_out];
    let mut dx = vec![0f64; input.len()];
    for o in 0..d.c_out {
        let g_plane = &g[o * plane..(o + 1) * plane];
        db[o] = g_plane.iter().map(|&v| v as f64).sum();
        for c in 0..d.c_in {
            let x_off = c * d.h * d.w;
            for i in 0..d.kh {
                for j in 0..d.kw {
                    let kidx = ((o * d.c_in + c) * d.kh + i) * d.kw + j;
                    let wt = k[kidx] as f64;
                    let mut s = 0f64;
                    for y in 0..d.oh {
                        let row = x_off + (y + i) * d.w + j;
                        let g_row = &g_plane[y * d.ow..(y + 1) * d.ow];
                        let x_row = &x[row..row + d.ow];
                        let dx_row = &mut dx[row..row + d.ow];
                        for ((&gv, &xv), dxv) in g_row.iter().zip(x_row).zip(dx_row) {
                            s += gv as f64 * xv as f64;
                            *dxv += gv as f64 * wt;
                        }
                    }
                    dk[kidx] = s;
                }
            }
        }
    }
    Ok(LayerGrads {
        param_grads: vec![
            to_tensor(kernels.shape(), dk)?,
            to_tensor(bias.shape(), db)?,
        ],
        input_grad: to_tensor(input.shape(), dx)?,
    })
}

fn to_tensor(shape: &[usize], data: Vec<f64>) -> Result<Tensor, TensorError> {
    Tensor::new(shape.to_vec(), data.into_iter().map(|v| v as f32).collect())
}

/// Zero-pads the two spatial axes of a `[C, H, W]` tensor by `pad` on every side.
pub fn pad2d_forward(input: &Tensor, pad: usize) -> Result<Tensor, TensorError> {
    input.expect_rank("pad2d_forward", 3)?;
    if pad == 0 {
        return Ok(input.clone());
    }
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (ph, pw) = (h + 2 * pad, w + 2 * pad);
    let mut out = vec![0f32; c * ph * pw];
    for ch in 0..c {
        for y in 0..h {
            let src = &input.data()[(ch * h + y) * w..(ch * h + y + 1) * w];
            let start = (ch * ph + y + pad) * pw + pad;
            out[start..start + w].copy_from_slice(src);
        }
    }
    Tensor::new(vec![c, ph, pw], out)
}

/// Crops the padded border from an upstream gradient, inverting [`pad2d_forward`].
pub fn pad2d_backward(upstream: &Tensor, pad: usize) -> Result<Tensor, TensorError> {
    const OP: &str = "pad2d_backward";
    upstream.expect_rank(OP, 3)?;
    if pad == 0 {
        return Ok(upstream.clone());
    }
    let (c, ph, pw) = (upstream.shape()[0], upstream.shape()[1], upstream.shape()[2]);
    if ph <= 2 * pad || pw <= 2 * pad {
        return Err(TensorError::invalid(
            OP,
            format!("upstream {ph}x{pw} too small for padding {pad}"),
        ));
    }
    let (h, w) = (ph - 2 * pad, pw - 2 * pad);
    let mut out = vec![0f32; c * h * w];
    for ch in 0..c {
        for y in 0..h {
            let start = (ch * ph + y + pad) * pw + pad;
            out[(ch * h + y) * w..(ch * h + y + 1) * w]
                .copy_from_slice(&upstream.data()[start..start + w]);
        }
    }
    Tensor::new(vec![c, h, w], out)
}

pub fn relu_forward(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for v in out.data_mut() {
        *v = v.max(0.0);
    }
    out
}

/// Passes `upstream` through where `x > 0`, zero elsewhere (including `x == 0`).
pub fn relu_backward(x: &Tensor, upstream: &Tensor) -> Result<Tensor, TensorError> {
    upstream.expect_shape("relu_backward", "upstream", x.shape())?;
    let data = x
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&xv, &g)| if xv > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(x.shape().to_vec(), data)
}

/// 2x2, stride-2 max pooling over `[C, H, W]`.
///
/// Returns the pooled tensor and, for every output cell, the flat input
/// index of the maximum. Ties resolve to the lowest flat index.
pub fn maxpool2_forward(input: &Tensor) -> Result<(Tensor, Vec<usize>), TensorError> {
    const OP: &str = "maxpool2_forward";
    input.expect_rank(OP, 3)?;
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    if h % 2 != 0 {
        return Err(TensorError::invalid(OP, format!("height {h} is odd")));
    }
    if w % 2 != 0 {
        return Err(TensorError::invalid(OP, format!("width {w} is odd")));
    }
    let (oh, ow) = (h / 2, w / 2);
    let x = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    let mut indices = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        for y in 0..oh {
            for xo in 0..ow {
                let base = (ch * h + 2 * y) * w + 2 * xo;
                let mut best = base;
                for cand in [base + 1, base + w, base + w + 1] {
                    if x[cand] > x[best] {
                        best = cand;
                    }
                }
                out.push(x[best]);
                indices.push(best);
            }
        }
    }
    Ok((Tensor::new(vec![c, oh, ow], out)?, indices))
}

/// Routes each upstream entry to the input position recorded by
/// [`maxpool2_forward`]; `input_shape` is the shape of the pooled input.
pub fn maxpool2_backward(
    indices: &[usize],
    upstream: &Tensor,
    input_shape: &[usize],
) -> Result<Tensor, TensorError> {
    const OP: &str = "maxpool2_backward";
    if indices.len() != upstream.len() {
        return Err(TensorError::mismatch(
            OP,
            "index count",
            upstream.len(),
            indices.len(),
        ));
    }
    let mut out = Tensor::zeros(input_shape);
    let n = out.len();
    let dst = out.data_mut();
    for (&idx, &g) in indices.iter().zip(upstream.data()) {
        if idx >= n {
            return Err(TensorError::invalid(
                OP,
                format!("index {idx} out of range for {n} inputs"),
            ));
        }
        dst[idx] += g;
    }
    Ok(out)
}

fn dense_dims(
    op: &'static str,
    x: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
) -> Result<(usize, usize), TensorError> {
    x.expect_rank(op, 1)?;
    weights.expect_rank(op, 2)?;
    bias.expect_rank(op, 1)?;
    let (d_out, d_in) = (weights.shape()[0], weights.shape()[1]);
    if x.len() != d_in {
        return Err(TensorError::mismatch(op, "input length", d_in, x.len()));
    }
    if bias.len() != d_out {
        return Err(TensorError::mismatch(op, "bias length", d_out, bias.len()));
    }
    Ok((d_out, d_in))
}

/// Affine map `W x + b` with `W` of shape `[D_out, D_in]`.
pub fn dense_forward(x: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor, TensorError> {
    let (d_out, d_in) = dense_dims("dense_forward", x, weights, bias)?;
    let xs = x.data();
    let out = (0..d_out)
        .map(|o| {
            let row = &weights.data()[o * d_in..(o + 1) * d_in];
            let s: f64 = row
                .iter()
                .zip(xs)
                .map(|(&w, &v)| w as f64 * v as f64)
                .sum();
            (s + bias.data()[o] as f64) as f32
        })
        .collect();
    Tensor::new(vec![d_out], out)
}

/// `param_grads` is `[d_weights, d_bias]`.
pub fn dense_backward(
    x: &Tensor,
    weights: &Tensor,
    bias: &Tensor,
    upstream: &Tensor,
) -> Result<LayerGrads, TensorError> {
    const OP: &str = "dense_backward";
    let (d_out, d_in) = dense_dims(OP, x, weights, bias)?;
    upstream.expect_shape(OP, "upstream", &[d_out])?;
    let g = upstream.data();
    let xs = x.data();
    let mut dw = Vec::with_capacity(d_out * d_in);
    for &gv in g {
        dw.extend(xs.iter().map(|&v| gv * v));
    }
    let mut dx = vec![0f64; d_in];
    for (o, &gv) in g.iter().enumerate() {
        let row = &weights.data()[o * d_in..(o + 1) * d_in];
        for (acc, &w) in dx.iter_mut().zip(row) {
            *acc += gv as f64 * w as f64;
        }
    }
    Ok(LayerGrads {
        param_grads: vec![Tensor::new(vec![d_out, d_in], dw)?, upstream.clone()],
        input_grad: to_tensor(&[d_in], dx)?,
    })
}

/// Numerically stable softmax over a rank-1 logit vector.
///
/// Entries are clamped into the open interval (0, 1) so that downstream
/// log-scores stay finite even for logits of magnitude 1e4.
pub fn softmax(logits: &Tensor) -> Result<Tensor, TensorError> {
    const OP: &str = "softmax";
    logits.expect_rank(OP, 1)?;
    if logits.len() < 2 {
        return Err(TensorError::invalid(OP, "need at least 2 logits"));
    }
    if let Some(index) = logits.first_non_finite() {
        return Err(TensorError::NonFinite { op: OP, index });
    }
    let max = logits
        .data()
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| m.max(v as f64));
    let exps: Vec<f64> = logits
        .data()
        .iter()
        .map(|&v| (v as f64 - max).exp())
        .collect();
    let total: f64 = exps.iter().sum();
    let upper = 1.0 - f32::EPSILON / 2.0;
    let out = exps
        .iter()
        .map(|&e| ((e / total) as f32).clamp(f32::MIN_POSITIVE, upper))
        .collect();
    Tensor::new(vec![logits.len()], out)
}

/// Cross-entropy of softmax `scores` against a one-hot target.
///
/// Returns the loss `-ln(score of true class)` and the gradient of the
/// combined softmax + cross-entropy with respect to the logits,
/// `scores - one_hot`.
pub fn cross_entropy_loss(scores: &Tensor, one_hot: &Tensor) -> Result<(f64, Tensor), TensorError> {
    const OP: &str = "cross_entropy_loss";
    scores.expect_rank(OP, 1)?;
    one_hot.expect_shape(OP, "one_hot", scores.shape())?;
    let target = one_hot_index(one_hot).ok_or_else(|| {
        TensorError::invalid(OP, "one_hot must contain exactly one 1 and zeros elsewhere")
    })?;
    let p = scores.data()[target] as f64;
    if !(p > 0.0 && p <= 1.0) {
        return Err(TensorError::invalid(
            OP,
            format!("true-class score {p} outside (0, 1]"),
        ));
    }
    let grad = scores
        .data()
        .iter()
        .zip(one_hot.data())
        .map(|(&s, &t)| s - t)
        .collect();
    Ok((-p.ln(), Tensor::new(scores.shape().to_vec(), grad)?))
}

pub(crate) fn one_hot_index(one_hot: &Tensor) -> Option<usize> {
    let mut hot = None;
    for (i, &v) in one_hot.data().iter().enumerate() {
        if v == 1.0 {
            if hot.is_some() {
                return None;
            }
            hot = Some(i);
        } else if v != 0.0 {
            return None;
        }
    }
    hot
}
