//! SGD with momentum.

use serde::{Deserialize, Serialize};

use crate::tensor::{Tensor, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SgdConfig {
    pub learning_rate: f32,
    pub momentum: f32,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            learning_rate: 0.01,
            momentum: 0.9,
        }
    }
}

impl SgdConfig {
    pub fn validate(&self) -> Result<(), TensorError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TensorError::invalid(
                "sgd",
                format!("learning_rate must be > 0, got {}", self.learning_rate),
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(TensorError::invalid(
                "sgd",
                format!("momentum must be in [0, 1), got {}", self.momentum),
            ));
        }
        Ok(())
    }
}

/// One momentum step over a parameter set:
/// `v <- momentum * v - lr * g`, then `p <- p + v`.
///
/// All three slices must have equal length with pairwise equal shapes.
/// Nothing is modified when any shape check fails.
///
/// The learning rate is not validated here so that a zero rate can be
/// used to freeze parameters.
pub fn sgd_step(
    params: &mut [Tensor],
    grads: &[Tensor],
    velocity: &mut [Tensor],
    cfg: &SgdConfig,
) -> Result<(), TensorError> {
    const OP: &str = "sgd_step";
    if grads.len() != params.len() {
        return Err(TensorError::mismatch(OP, "gradient count", params.len(), grads.len()));
    }
    if velocity.len() != params.len() {
        return Err(TensorError::mismatch(OP, "velocity count", params.len(), velocity.len()));
    }
    for (i, p) in params.iter().enumerate() {
        grads[i].expect_shape(OP, &format!("gradient {i}"), p.shape())?;
        velocity[i].expect_shape(OP, &format!("velocity {i}"), p.shape())?;
    }
    for ((p, g), v) in params.iter_mut().zip(grads).zip(velocity.iter_mut()) {
        for ((pv, &gv), vv) in p.data_mut().iter_mut().zip(g.data()).zip(v.data_mut()) {
            *vv = cfg.momentum * *vv - cfg.learning_rate * gv;
            *pv += *vv;
        }
    }
    Ok(())
}
