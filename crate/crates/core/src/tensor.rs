//! Dense row-major `f64` tensors with a leading batch axis.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("shape mismatch: expected {expected:?}, got {actual:?}")]
pub struct ShapeError {
    pub expected: Vec<usize>,
    pub actual: Vec<usize>,
}

/// A contiguous tensor. Image batches use the `[n, channels, height, width]`
/// layout; flat feature batches use `[n, features]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn full(shape: &[usize], value: f64) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![value; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, ShapeError> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(ShapeError {
                expected: shape,
                actual: vec![data.len()],
            });
        }
        Ok(Self { shape, data })
    }

    /// Stacks equally-shaped samples along a new leading batch axis.
    pub fn stack(sample_shape: &[usize], samples: &[&[f64]]) -> Result<Self, ShapeError> {
        let per: usize = sample_shape.iter().product();
        let mut data = Vec::with_capacity(per * samples.len());
        for s in samples {
            if s.len() != per {
                return Err(ShapeError {
                    expected: sample_shape.to_vec(),
                    actual: vec![s.len()],
                });
            }
            data.extend_from_slice(s);
        }
        let mut shape = vec![samples.len()];
        shape.extend_from_slice(sample_shape);
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Size of the leading (batch) axis.
    pub fn batch_size(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    /// Shape without the leading batch axis.
    pub fn sample_shape(&self) -> &[usize] {
        if self.shape.is_empty() {
            &[]
        } else {
            &self.shape[1..]
        }
    }

    pub fn sample_len(&self) -> usize {
        self.sample_shape().iter().product()
    }

    pub fn sample(&self, index: usize) -> &[f64] {
        let len = self.sample_len();
        &self.data[index * len..(index + 1) * len]
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self, ShapeError> {
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(ShapeError {
                expected: shape,
                actual: self.shape,
            });
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
