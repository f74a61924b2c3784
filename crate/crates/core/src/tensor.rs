//! Dense row-major `f32` tensors.

use thiserror::Error;

/// Errors raised by tensor construction and the layer operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("{op}: shape mismatch in {dim}: expected {expected}, got {actual}")]
    ShapeMismatch {
        op: &'static str,
        dim: String,
        expected: String,
        actual: String,
    },
    #[error("{op}: invalid input: {reason}")]
    InvalidInput { op: &'static str, reason: String },
    #[error("{op}: non-finite value at flat index {index}")]
    NonFinite { op: &'static str, index: usize },
}

impl TensorError {
    pub(crate) fn mismatch(
        op: &'static str,
        dim: impl Into<String>,
        expected: impl std::fmt::Display,
        actual: impl std::fmt::Display,
    ) -> Self {
        TensorError::ShapeMismatch {
            op,
            dim: dim.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn invalid(op: &'static str, reason: impl Into<String>) -> Self {
        TensorError::InvalidInput {
            op,
            reason: reason.into(),
        }
    }
}

/// A dense n-dimensional array of `f32` values with explicit shape.
///
/// `data.len()` always equals the product of `shape`, and every dimension
/// is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self, TensorError> {
        if shape.is_empty() {
            return Err(TensorError::invalid("tensor", "rank must be at least 1"));
        }
        if let Some(axis) = shape.iter().position(|&d| d == 0) {
            return Err(TensorError::invalid(
                "tensor",
                format!("dimension {axis} has size 0"),
            ));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::mismatch(
                "tensor",
                "data length",
                expected,
                data.len(),
            ));
        }
        Ok(Tensor { shape, data })
    }

    /// Panics if any dimension is zero.
    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, 0.0)
    }

    pub fn full(shape: &[usize], value: f32) -> Self {
        assert!(
            !shape.is_empty() && shape.iter().all(|&d| d > 0),
            "invalid tensor shape {shape:?}"
        );
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn from_vec(data: Vec<f32>) -> Self {
        let n = data.len();
        Tensor::new(vec![n], data).expect("from_vec requires a non-empty vector")
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Same data under a new shape with equal element count.
    pub fn reshape(self, shape: Vec<usize>) -> Result<Self, TensorError> {
        Tensor::new(shape, self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|v| !v.is_finite())
    }

    pub(crate) fn expect_rank(&self, op: &'static str, rank: usize) -> Result<(), TensorError> {
        if self.rank() != rank {
            return Err(TensorError::mismatch(op, "rank", rank, self.rank()));
        }
        Ok(())
    }

    pub(crate) fn expect_shape(
        &self,
        op: &'static str,
        what: &str,
        shape: &[usize],
    ) -> Result<(), TensorError> {
        if self.shape != shape {
            return Err(TensorError::mismatch(
                op,
                format!("{what} shape"),
                format!("{shape:?}"),
                format!("{:?}", self.shape),
            ));
        }
        Ok(())
    }

    /// Zero-filled tensor with this tensor's shape.
    pub fn zeros_like(&self) -> Self {
        Tensor::zeros(&self.shape)
    }

    /// Bitwise comparison, treating `-0.0` and `0.0` as distinct.
    pub fn bitwise_eq(&self, other: &Tensor) -> bool {
        self.shape == other.shape
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_checks_length() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
        let err = Tensor::new(vec![2, 3], vec![0.0; 5]).unwrap_err();
        assert!(matches!(err, TensorError::ShapeMismatch { .. }));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(Tensor::new(vec![2, 0], vec![]).is_err());
        assert!(Tensor::new(vec![], vec![]).is_err());
    }

    #[test]
    fn reshape_keeps_data() {
        let t = Tensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = t.clone().reshape(vec![4]).unwrap();
        assert_eq!(r.data(), t.data());
        assert!(t.reshape(vec![3]).is_err());
    }
}
