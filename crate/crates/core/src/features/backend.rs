use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use image::DynamicImage;
use serde::{Deserialize, Serialize};
use tract_onnx::prelude::*;

use super::preprocess::{preprocess_image, ImageTensor, Interpolation};
use super::{pool_and_normalize, FeatureVector};
use crate::{Error, Result};

/// Pixel normalization applied before inference: `(p * pixel_scale - mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Preprocessing {
    pub mean: [f32; 3],
    pub std: [f32; 3],
    pub pixel_scale: f32,
    pub interpolation: Interpolation,
}

impl Default for Preprocessing {
    // ImageNet statistics used by the torchvision backbones.
    fn default() -> Self {
        Preprocessing {
            mean: [0.485, 0.456, 0.406],
            std: [0.229, 0.224, 0.225],
            pixel_scale: 1.0 / 255.0,
            interpolation: Interpolation::Bilinear,
        }
    }
}

/// Sidecar JSON stored next to the model file (`model.onnx` → `model.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelSidecar {
    backend_tag: String,
    #[serde(default)]
    preprocessing: Preprocessing,
    #[serde(default)]
    output_channels: Option<usize>,
}

/// Anything that turns a decoded image into an embedding.
pub trait EmbeddingBackend: Send + Sync {
    fn tag(&self) -> &str;

    /// Output dimensionality, if known before the first inference.
    fn dim(&self) -> Option<usize>;

    fn embed(&self, image: &DynamicImage) -> Result<FeatureVector>;
}

type Plan = Arc<TypedRunnableModel>;

/// A convolutional backbone truncated after its last convolutional layer,
/// run through tract. Embeddings are the L2-normalized spatial mean of the
/// final feature map.
pub struct OnnxBackend {
    model_path: PathBuf,
    sidecar: ModelSidecar,
    model: InferenceModel,
    // one optimized plan per input geometry
    plans: Mutex<HashMap<(usize, usize), Plan>>,
}

impl OnnxBackend {
    pub fn load(model_path: impl AsRef<Path>) -> Result<Self> {
        let model_path = model_path.as_ref().to_path_buf();
        let sidecar_path = model_path.with_extension("json");
        let raw = std::fs::read(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
        let sidecar: ModelSidecar = serde_json::from_slice(&raw).map_err(|e| Error::Parse {
            path: sidecar_path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let model = tract_onnx::onnx()
            .model_for_path(&model_path)
            .map_err(|e| backend_error(&model_path, e))?;
        Ok(OnnxBackend {
            model_path,
            sidecar,
            model,
            plans: Mutex::new(HashMap::new()),
        })
    }

    pub fn preprocessing(&self) -> &Preprocessing {
        &self.sidecar.preprocessing
    }

    fn plan_for(&self, height: usize, width: usize) -> Result<Plan> {
        let mut plans = self.plans.lock().expect("plan cache poisoned");
        if let Some(plan) = plans.get(&(height, width)) {
            return Ok(plan.clone());
        }
        let plan = self
            .model
            .clone()
            .with_input_fact(0, f32::fact([1, 3, height, width]).into())
            .and_then(|m| m.into_optimized())
            .and_then(|m| m.into_runnable())
            .map_err(|e| backend_error(&self.model_path, e))?;
        plans.insert((height, width), plan.clone());
        Ok(plan)
    }

    /// Runs the network on an already preprocessed tensor.
    pub fn embed_tensor(&self, tensor: &ImageTensor) -> Result<FeatureVector> {
        let plan = self.plan_for(tensor.height, tensor.width)?;
        let input = tract_ndarray::Array4::from_shape_vec(
            (1, 3, tensor.height, tensor.width),
            tensor.data.clone(),
        )
        .map_err(|e| backend_error(&self.model_path, e))?;
        let outputs = plan
            .run(tvec!(Tensor::from(input).into()))
            .map_err(|e| backend_error(&self.model_path, e))?;
        let map = outputs[0]
            .to_plain_array_view::<f32>()
            .map_err(|e| backend_error(&self.model_path, e))?;
        let shape = map.shape();
        if shape.len() != 4 || shape[0] != 1 {
            return Err(Error::Backend {
                model: self.model_path.display().to_string(),
                message: format!("expected a 1×C×H×W feature map, got shape {shape:?}"),
            });
        }
        let channels = shape[1];
        if let Some(expected) = self.sidecar.output_channels {
            if expected != channels {
                return Err(Error::Backend {
                    model: self.model_path.display().to_string(),
                    message: format!("sidecar declares {expected} channels, model produced {channels}"),
                });
            }
        }
        let data: Vec<f32> = map.iter().copied().collect();
        pool_and_normalize(&data, channels, shape[2] * shape[3])
    }
}

impl EmbeddingBackend for OnnxBackend {
    fn tag(&self) -> &str {
        &self.sidecar.backend_tag
    }

    fn dim(&self) -> Option<usize> {
        self.sidecar.output_channels
    }

    fn embed(&self, image: &DynamicImage) -> Result<FeatureVector> {
        let tensor = preprocess_image(image, &self.sidecar.preprocessing)?;
        self.embed_tensor(&tensor)
    }
}

impl std::fmt::Debug for OnnxBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxBackend")
            .field("model_path", &self.model_path)
            .field("backend_tag", &self.sidecar.backend_tag)
            .finish()
    }
}

fn backend_error(model: &Path, err: impl std::fmt::Display) -> Error {
    Error::Backend {
        model: model.display().to_string(),
        message: err.to_string(),
    }
}
