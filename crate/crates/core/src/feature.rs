//! Appearance feature vectors and the distance operation between them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("feature dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("feature vector contains a non-finite component")]
    NonFinite,
}

/// Fixed-length appearance embedding.
///
/// Components are stored as `f32` to match the wire encoding exactly, so a
/// vector survives an encode/decode round trip bit-for-bit. Distance math is
/// accumulated in `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f32>);

impl FeatureVector {
    pub fn new(values: Vec<f32>) -> Result<Self, FeatureError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::NonFinite);
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    /// Euclidean distance to another vector of the same dimension.
    pub fn l2_distance(&self, other: &FeatureVector) -> Result<f64, FeatureError> {
        l2_distance(self, other)
    }
}

/// Euclidean norm of `a - b`.
pub fn l2_distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64, FeatureError> {
    if a.dim() != b.dim() {
        return Err(FeatureError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let mut acc = 0.0f64;
    for (x, y) in a.0.iter().zip(&b.0) {
        let d = *x as f64 - *y as f64;
        acc += d * d;
    }
    Ok(acc.sqrt())
}
