//! Embedding of manifest images into a feature store.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use relfilter::features::{open_image, EmbeddingBackend};
use relfilter::{DatasetManifest, Error, FeatureStore, FeatureVector, ImageRecord};

use crate::error::CliResult;

/// An image that could not be embedded.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EmbedFailure {
    pub id: String,
    pub error: String,
}

/// Image path of `record`, relative paths resolved against `base`.
pub fn image_path(record: &ImageRecord, base: &Path) -> Option<PathBuf> {
    record.path.as_ref().map(|p| {
        if p.is_absolute() {
            p.clone()
        } else {
            base.join(p)
        }
    })
}

pub fn embed_record(
    backend: &dyn EmbeddingBackend,
    record: &ImageRecord,
    base: &Path,
) -> relfilter::Result<FeatureVector> {
    let path = image_path(record, base)
        .ok_or_else(|| Error::Validation(format!("record '{}' has no image path", record.id)))?;
    let image = open_image(&path)?;
    backend.embed(&image)
}

/// Embeds every record in parallel; the store keeps manifest order.
/// Failures abort unless `skip_errors` is set, in which case they are
/// returned alongside the store.
pub fn embed_manifest(
    backend: &dyn EmbeddingBackend,
    manifest: &DatasetManifest,
    base: &Path,
    skip_errors: bool,
) -> CliResult<(FeatureStore, Vec<EmbedFailure>)> {
    let results: Vec<relfilter::Result<FeatureVector>> = manifest
        .records()
        .par_iter()
        .map(|r| embed_record(backend, r, base))
        .collect();

    let mut store: Option<FeatureStore> = None;
    let mut failures = Vec::new();
    for (record, result) in manifest.records().iter().zip(results) {
        match result {
            Ok(v) => {
                let store =
                    store.get_or_insert_with(|| FeatureStore::new(v.dim(), backend.tag()));
                store.insert(record.id.clone(), v)?;
            }
            Err(e) if skip_errors => {
                log::warn!("skipping '{}': {e}", record.id);
                failures.push(EmbedFailure {
                    id: record.id.clone(),
                    error: e.to_string(),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let store = store.ok_or(Error::EmptyDataset)?;
    Ok((store, failures))
}

/// Directory that relative image paths in a manifest refer to.
pub fn manifest_base(manifest_path: &Path) -> PathBuf {
    manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}
