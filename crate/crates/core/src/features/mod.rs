//! Image embeddings: preprocessing, ONNX inference, pooling and the
//! binary feature store.

mod backend;
mod preprocess;
mod store;

pub use backend::{EmbeddingBackend, OnnxBackend, Preprocessing};
pub use preprocess::{
    decode_image, open_image, preprocess_image, target_geometry, ImageTensor, Interpolation,
    LANDSCAPE, PORTRAIT,
};
pub use store::{FeatureStore, MAGIC, VERSION};

use crate::{Error, Result};

/// Allowed deviation from unit norm for stored embeddings.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-5;

/// A dense embedding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f32>);

impl FeatureVector {
    /// Wraps raw values, rejecting non-finite entries.
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite feature value at index {pos}")));
        }
        Ok(FeatureVector(values))
    }

    /// Scales `values` to unit Euclidean norm.
    pub fn normalized(values: &[f64]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite feature value".into()));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Data("cannot normalize a zero vector".into()));
        }
        Ok(FeatureVector(values.iter().map(|v| (v / norm) as f32).collect()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f32> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>().sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOLERANCE
    }

    pub fn dot(&self, other: &FeatureVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| f64::from(a) * f64::from(b))
            .sum())
    }

    /// ‖self − other‖² accumulated in double precision.
    pub fn squared_distance(&self, other: &FeatureVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let d = f64::from(a) - f64::from(b);
                d * d
            })
            .sum())
    }
}

impl AsRef<[f32]> for FeatureVector {
    fn as_ref(&self) -> &[f32] {
        &self.0
    }
}

/// For unit vectors, ‖x − q‖² = 2 − 2⟨x, q⟩.
pub fn unit_squared_distance(dot: f64) -> f64 {
    2.0 - 2.0 * dot
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Shape { expected, actual });
    }
    Ok(())
}

/// Global average pooling over a `channels × spatial` feature map stored
/// channel-major, followed by L2 normalization.
pub fn pool_and_normalize(map: &[f32], channels: usize, spatial: usize) -> Result<FeatureVector> {
    if channels == 0 || spatial == 0 || map.len() != channels * spatial {
        return Err(Error::Shape {
            expected: channels * spatial,
            actual: map.len(),
        });
    }
    let pooled: Vec<f64> = map
        .chunks_exact(spatial)
        .map(|c| c.iter().map(|&v| f64::from(v)).sum::<f64>() / spatial as f64)
        .collect();
    FeatureVector::normalized(&pooled)
}
