//! Content-based relevance filtering for flood images posted on social media.
//!
//! The crate ranks and filters images for three fixed information objectives
//! (flooded area, inundation depth, water pollution). Two image-based filters
//! are provided:
//!
//! - [`retrieval`]: kernel density scoring of an image against a fixed set of
//!   "ideal query" embeddings,
//! - [`svm`]: a binary linear SVM per objective, trained by dual coordinate
//!   descent,
//!
//! plus the keyword/time heuristic in [`baseline`] that ignores image content.
//! [`metrics`] evaluates rankings (AP, mAP, PR curves, best F1) and [`stream`]
//! turns any scorer into a hard-decision on-line filter.
//!
//! Embeddings come either from an ONNX backbone via [`features::OnnxBackend`]
//! or from precomputed feature stores (see [`features::FeatureStore`]).

pub mod baseline;
pub mod data;
pub mod dedup;
mod error;
pub mod features;
pub mod metrics;
pub mod retrieval;
pub mod stream;
pub mod svm;

pub use data::{DatasetManifest, ImageRecord, Objective, Split};
pub use error::{Error, Result};
pub use features::{FeatureStore, FeatureVector};
pub use metrics::RankedList;

/// Feature spaces with published default hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backbone {
    Vgg16,
    Resnet50,
    Rmac,
}

impl Backbone {
    pub const ALL: [Backbone; 3] = [Backbone::Vgg16, Backbone::Resnet50, Backbone::Rmac];

    /// KDE bandwidth used for retrieval in this feature space.
    pub fn default_gamma(self) -> f64 {
        match self {
            Backbone::Vgg16 => 10.0,
            Backbone::Resnet50 => 5.0,
            Backbone::Rmac => 5.0,
        }
    }

    /// SVM regularization constant selected by cross-validation.
    pub fn default_c(self) -> f64 {
        match self {
            Backbone::Vgg16 => 2.5,
            Backbone::Resnet50 => 0.5,
            Backbone::Rmac => 0.005,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Backbone::Vgg16 => "vgg16",
            Backbone::Resnet50 => "resnet50",
            Backbone::Rmac => "rmac",
        }
    }

    /// Guesses the backbone from a free-form backend tag such as `"resnet50-imagenet"`.
    pub fn from_tag(tag: &str) -> Option<Backbone> {
        let tag = tag.to_ascii_lowercase();
        if tag.contains("vgg") {
            Some(Backbone::Vgg16)
        } else if tag.contains("resnet") {
            Some(Backbone::Resnet50)
        } else if tag.contains("rmac") || tag.contains("r-mac") {
            Some(Backbone::Rmac)
        } else {
            None
        }
    }
}

impl std::str::FromStr for Backbone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vgg16" | "vgg" => Ok(Backbone::Vgg16),
            "resnet50" | "resnet-50" | "resnet" => Ok(Backbone::Resnet50),
            "rmac" | "deep-rmac" | "r-mac" => Ok(Backbone::Rmac),
            other => Err(Error::Param(format!("unknown backbone '{other}'"))),
        }
    }
}
