//! End-to-end runs: embed → dedup → split/train/rank → evaluate.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use relfilter::baseline::{rank_by_text_time, tweet_items};
use relfilter::data::{default_keywords, load_keywords, split_dataset};
use relfilter::dedup::{deduplicate, find_near_duplicates};
use relfilter::features::OnnxBackend;
use relfilter::metrics::{average_precision, best_f1, mean_ap, pr_curve};
use relfilter::retrieval::{rank_by_retrieval, KdeParams, QuerySet};
use relfilter::svm::{cross_validate_c, rank_by_classifier, train_svm, TrainConfig};
use relfilter::{Backbone, DatasetManifest, Error, FeatureStore, Objective, RankedList};
use serde::{Deserialize, Serialize};

use crate::artifact::{self, Provenance};
use crate::embed::{embed_manifest, manifest_base};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Classification,
    Retrieval,
    Baseline,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Classification => "classification",
            Mode::Retrieval => "retrieval",
            Mode::Baseline => "baseline",
        }
    }
}

fn default_objectives() -> Vec<Objective> {
    Objective::ALL.to_vec()
}

fn default_folds() -> usize {
    5
}

fn default_train_fraction() -> f64 {
    0.75
}

fn default_tolerance() -> f64 {
    TrainConfig::default().tolerance
}

fn default_max_iterations() -> usize {
    TrainConfig::default().max_iterations
}

/// Pipeline configuration, usually read from TOML.
///
/// Without `test_manifest` the manifest is split into train and test parts.
/// Without `store` the images are embedded with `embed_model` first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: Mode,
    #[serde(default)]
    pub backend: Option<Backbone>,
    pub manifest: PathBuf,
    #[serde(default)]
    pub store: Option<PathBuf>,
    #[serde(default)]
    pub test_manifest: Option<PathBuf>,
    #[serde(default)]
    pub test_store: Option<PathBuf>,
    #[serde(default)]
    pub embed_model: Option<PathBuf>,
    /// Cosine threshold for removing near duplicates from the test set.
    #[serde(default)]
    pub dedup_threshold: Option<f64>,
    #[serde(default = "default_objectives")]
    pub objectives: Vec<Objective>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default, rename = "C")]
    pub c: Option<f64>,
    /// If set, C is picked by cross-validation over this grid.
    #[serde(default)]
    pub c_grid: Option<Vec<f64>>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub keywords: Option<PathBuf>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    pub fn new(mode: Mode, manifest: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            mode,
            backend: None,
            manifest: manifest.into(),
            store: None,
            test_manifest: None,
            test_store: None,
            embed_model: None,
            dedup_threshold: None,
            objectives: default_objectives(),
            gamma: None,
            c: None,
            c_grid: None,
            folds: default_folds(),
            train_fraction: default_train_fraction(),
            keywords: None,
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            out_dir: out_dir.into(),
        }
    }

    pub fn from_toml(path: &Path) -> CliResult<Self> {
        let raw = artifact::read_file(path)?;
        let text = String::from_utf8(raw)
            .map_err(|e| Error::Format(format!("{}: not UTF-8: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| {
            CliError::Core(Error::Parse {
                path: path.to_path_buf(),
                line: e
                    .span()
                    .map_or(0, |s| text[..s.start].matches('\n').count() + 1),
                message: e.message().to_string(),
            })
        })
    }

    /// The output directory does not affect results and is left out of the hash.
    pub fn provenance(&self, seed: u64) -> Provenance {
        let mut hashed = self.clone();
        hashed.out_dir = PathBuf::new();
        Provenance::new(&hashed, seed)
    }

    fn validate(&self) -> CliResult<()> {
        if self.objectives.is_empty() {
            return Err(Error::Param("no objectives configured".into()).into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Param(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            ))
            .into());
        }
        if let Some(t) = self.dedup_threshold {
            if !(-1.0..=1.0).contains(&t) {
                return Err(Error::Param(format!("dedup threshold {t} outside [-1, 1]")).into());
            }
        }
        if self.mode != Mode::Baseline && self.store.is_none() && self.embed_model.is_none() {
            return Err(CliError::Usage(format!(
                "{} mode needs a feature store or an embedding model",
                self.mode.as_str()
            )));
        }
        Ok(())
    }

    fn backbone(&self, store: Option<&FeatureStore>) -> Option<Backbone> {
        self.backend
            .or_else(|| store.and_then(|s| Backbone::from_tag(s.backend_tag())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSummary {
    /// `None` when the test set holds no relevant item for this objective.
    pub ap: Option<f64>,
    pub best_f1: Option<f64>,
    pub threshold: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub n_relevant: usize,
    pub n_ranked: usize,
    pub ranking: String,
    pub pr_curve: Option<String>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_queries: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub method: String,
    pub mode: Mode,
    pub backend: Option<String>,
    /// Manifest holding the ground truth of the ranked items.
    pub labels: PathBuf,
    pub n_train: usize,
    pub n_test: usize,
    pub n_duplicates_removed: usize,
    pub objectives: BTreeMap<Objective, ObjectiveSummary>,
    pub map: Option<f64>,
}

impl Summary {
    pub fn load(path: &Path) -> CliResult<Self> {
        let raw = artifact::read_file(path)?;
        serde_json::from_slice(&raw).map_err(|e| {
            CliError::Core(Error::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                message: e.to_string(),
            })
        })
    }
}

/// AP, best F1 and the PR curve of one ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub ap: f64,
    pub best: relfilter::metrics::BestF1,
    pub curve: relfilter::metrics::PrCurve,
    pub n_relevant: usize,
}

/// Evaluates `ranking` against the ground truth of `objective`.
/// Returns `None` (with a warning) if no ranked item is relevant.
pub fn evaluate(
    ranking: &RankedList,
    manifest: &DatasetManifest,
    objective: Objective,
) -> CliResult<Option<Evaluation>> {
    let relevant: BTreeSet<String> = manifest
        .relevant_ids(objective)
        .into_iter()
        .filter(|id| ranking.ids().any(|r| r == id))
        .collect();
    if relevant.is_empty() {
        log::warn!("no relevant items for '{objective}' among the ranked ids; skipping");
        return Ok(None);
    }
    let scores: BTreeMap<String, f64> = ranking.items().iter().cloned().collect();
    let labels: BTreeMap<String, bool> = scores
        .keys()
        .map(|id| (id.clone(), relevant.contains(id)))
        .collect();
    Ok(Some(Evaluation {
        ap: average_precision(ranking, &relevant)?,
        best: best_f1(&scores, &labels)?,
        curve: pr_curve(ranking, &relevant)?,
        n_relevant: relevant.len(),
    }))
}

fn load_store(path: &Path) -> CliResult<FeatureStore> {
    artifact::require_exists(path)?;
    Ok(FeatureStore::load(path)?)
}

fn embed_into(
    model: &Path,
    manifest: &DatasetManifest,
    manifest_path: &Path,
    out: &Path,
    provenance: &Provenance,
) -> CliResult<FeatureStore> {
    artifact::require_exists(model)?;
    let backend = OnnxBackend::load(model)?;
    let (store, _) = embed_manifest(&backend, manifest, &manifest_base(manifest_path), false)?;
    if let Some(parent) = out.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    store.save_with_provenance(out, Some(provenance.to_value()))?;
    Ok(store)
}

fn store_for_ids<'a>(
    store: &FeatureStore,
    ids: impl IntoIterator<Item = &'a str>,
    role: &str,
) -> CliResult<FeatureStore> {
    let wanted: BTreeSet<&str> = ids.into_iter().collect();
    let missing: Vec<&&str> = wanted.iter().filter(|id| !store.contains(id)).collect();
    if let Some(first) = missing.first() {
        return Err(Error::Validation(format!(
            "{} {role} ids have no features (first: '{first}')",
            missing.len()
        ))
        .into());
    }
    Ok(store.subset(|id| wanted.contains(id)))
}

struct Populations {
    train: DatasetManifest,
    test: DatasetManifest,
    labels: PathBuf,
}

fn populations(config: &PipelineConfig, seed: u64) -> CliResult<Populations> {
    artifact::require_exists(&config.manifest)?;
    let manifest = DatasetManifest::load(&config.manifest)?;
    match &config.test_manifest {
        Some(test_path) => {
            artifact::require_exists(test_path)?;
            Ok(Populations {
                train: manifest,
                test: DatasetManifest::load(test_path)?,
                labels: test_path.clone(),
            })
        }
        None => {
            let split = split_dataset(&manifest, config.train_fraction, seed)?;
            Ok(Populations {
                train: manifest.filtered(|id| split.train_ids.contains(id)),
                test: manifest.filtered(|id| split.test_ids.contains(id)),
                labels: config.manifest.clone(),
            })
        }
    }
}

/// Runs the configured pipeline, writes rankings, PR curves and
/// `summary.json` into `config.out_dir`, and returns the summary.
pub fn run_pipeline(config: &PipelineConfig, seed: u64) -> CliResult<Summary> {
    config.validate()?;
    let provenance = config.provenance(seed);
    let out = &config.out_dir;
    let Populations {
        train,
        mut test,
        labels,
    } = populations(config, seed)?;
    if train.is_empty() && config.mode != Mode::Baseline {
        return Err(Error::EmptyDataset.into());
    }

    // features
    let (train_store, test_store) = match (&config.store, &config.embed_model) {
        (Some(path), _) => {
            let train_store = load_store(path)?;
            let test_store = match &config.test_store {
                Some(p) => load_store(p)?,
                None => train_store.clone(),
            };
            (Some(train_store), Some(test_store))
        }
        (None, Some(model)) => {
            let train_store = embed_into(
                model,
                &train,
                &config.manifest,
                &out.join("features_train.fvs"),
                &provenance,
            )?;
            let test_source = config.test_manifest.as_ref().unwrap_or(&config.manifest);
            let test_store = embed_into(
                model,
                &test,
                test_source,
                &out.join("features_test.fvs"),
                &provenance,
            )?;
            (Some(train_store), Some(test_store))
        }
        (None, None) => (None, None),
    };

    // dedup on the evaluation population
    let mut n_duplicates_removed = 0;
    if let Some(threshold) = config.dedup_threshold {
        let store = test_store.as_ref().ok_or_else(|| {
            CliError::Usage("deduplication needs a feature store or an embedding model".into())
        })?;
        let population = store_for_ids(store, test.ids(), "test")?;
        let pairs = find_near_duplicates(&population, threshold)?;
        let kept = deduplicate(&population, &pairs)?;
        n_duplicates_removed = population.len() - kept.len();
        artifact::write_csv(&out.join("dedup_pairs.csv"), &provenance, &pairs)?;
        test = test.filtered(|id| kept.contains(id));
    }
    if test.is_empty() {
        return Err(Error::EmptyDataset.into());
    }

    let backbone = config.backbone(train_store.as_ref());
    let train_cfg = TrainConfig {
        c: 1.0,
        tolerance: config.tolerance,
        max_iterations: config.max_iterations,
        seed,
    };

    let baseline_ranking = if config.mode == Mode::Baseline {
        let keywords = match &config.keywords {
            Some(p) => {
                artifact::require_exists(p)?;
                load_keywords(p)?
            }
            None => default_keywords(),
        };
        let ranking = rank_by_text_time(&tweet_items(&test), &keywords)?;
        artifact::write_ranking(&out.join("ranking_baseline.csv"), &provenance, &ranking)?;
        Some(ranking)
    } else {
        None
    };

    let mut objectives = BTreeMap::new();
    for &objective in &config.objectives {
        let mut entry_c = None;
        let mut entry_gamma = None;
        let mut n_queries = None;
        let (ranking, ranking_name) = match config.mode {
            Mode::Baseline => (
                baseline_ranking.clone().expect("baseline ranking computed"),
                "ranking_baseline.csv".to_string(),
            ),
            Mode::Classification => {
                let train_store = train_store.as_ref().expect("validated");
                let test_store = test_store.as_ref().expect("validated");
                let labels_map = train.binary_labels(objective);
                let c = match (&config.c_grid, config.c, backbone) {
                    (Some(grid), _, _) => {
                        let report = cross_validate_c(
                            train_store,
                            &labels_map,
                            grid,
                            config.folds,
                            &train_cfg,
                        )?;
                        log::info!("{objective}: cross-validation picked C={}", report.chosen_c);
                        report.chosen_c
                    }
                    (None, Some(c), _) => c,
                    (None, None, Some(b)) => b.default_c(),
                    (None, None, None) => {
                        return Err(CliError::Usage(
                            "no C given and the backbone is unknown; set C or backend".into(),
                        ))
                    }
                };
                entry_c = Some(c);
                let config_c = TrainConfig {
                    c,
                    ..train_cfg.clone()
                };
                let model = train_svm(train_store, &labels_map, objective, &config_c)?;
                let population = store_for_ids(test_store, test.ids(), "test")?;
                let name = format!("ranking_{objective}.csv");
                (rank_by_classifier(&population, &model)?, name)
            }
            Mode::Retrieval => {
                let train_store = train_store.as_ref().expect("validated");
                let test_store = test_store.as_ref().expect("validated");
                let mut query_ids = train.query_ids(objective);
                if query_ids.is_empty() {
                    log::warn!(
                        "no query images marked for '{objective}'; using all relevant training images"
                    );
                    query_ids = train.relevant_ids(objective);
                }
                if query_ids.is_empty() {
                    return Err(Error::Validation(format!(
                        "no query or relevant training images for '{objective}'"
                    ))
                    .into());
                }
                let gamma = match (config.gamma, backbone) {
                    (Some(g), _) => g,
                    (None, Some(b)) => b.default_gamma(),
                    (None, None) => {
                        return Err(CliError::Usage(
                            "no gamma given and the backbone is unknown; set gamma or backend"
                                .into(),
                        ))
                    }
                };
                entry_gamma = Some(gamma);
                n_queries = Some(query_ids.len());
                let queries =
                    QuerySet::from_store(objective, train_store, query_ids.iter().map(String::as_str))?;
                let population = store_for_ids(test_store, test.ids(), "test")?;
                let name = format!("ranking_{objective}.csv");
                (
                    rank_by_retrieval(&population, &queries, &KdeParams::new(gamma)?)?,
                    name,
                )
            }
        };
        if config.mode != Mode::Baseline {
            artifact::write_ranking(&out.join(&ranking_name), &provenance, &ranking)?;
        }

        let evaluation = evaluate(&ranking, &test, objective)?;
        let pr_name = match &evaluation {
            Some(ev) => {
                let name = format!("pr_{objective}.csv");
                artifact::write_pr_curve(&out.join(&name), &provenance, &ev.curve)?;
                Some(name)
            }
            None => None,
        };
        objectives.insert(
            objective,
            ObjectiveSummary {
                ap: evaluation.as_ref().map(|e| e.ap),
                best_f1: evaluation.as_ref().map(|e| e.best.f1),
                threshold: evaluation.as_ref().map(|e| e.best.threshold),
                precision: evaluation.as_ref().map(|e| e.best.precision),
                recall: evaluation.as_ref().map(|e| e.best.recall),
                n_relevant: evaluation.as_ref().map_or(0, |e| e.n_relevant),
                n_ranked: ranking.len(),
                ranking: ranking_name,
                pr_curve: pr_name,
                c: entry_c,
                gamma: entry_gamma,
                n_queries,
            },
        );
    }

    let aps: BTreeMap<Objective, f64> = objectives
        .iter()
        .filter_map(|(o, s)| s.ap.map(|ap| (*o, ap)))
        .collect();
    let map = if aps.is_empty() {
        None
    } else {
        Some(mean_ap(&aps)?)
    };
    let backend = match config.mode {
        Mode::Baseline => None,
        _ => backbone
            .map(|b| b.as_str().to_string())
            .or_else(|| train_store.as_ref().map(|s| s.backend_tag().to_string())),
    };
    let method = match &backend {
        Some(b) => format!("{}-{b}", config.mode.as_str()),
        None => config.mode.as_str().to_string(),
    };
    let summary = Summary {
        tool_version: provenance.tool_version.clone(),
        config_hash: provenance.config_hash.clone(),
        seed,
        method,
        mode: config.mode,
        backend,
        labels,
        n_train: train.len(),
        n_test: test.len(),
        n_duplicates_removed,
        objectives,
        map,
    };
    artifact::write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Writes one PR curve CSV per (method, objective) of each summary into
/// `out_dir`. Objectives without relevant items are skipped with a warning.
pub fn export_pr(summaries: &[PathBuf], out_dir: &Path, seed: u64) -> CliResult<Vec<PathBuf>> {
    let provenance = Provenance::new(&(summaries, "export-pr"), seed);
    let mut written = Vec::new();
    for summary_path in summaries {
        let summary = Summary::load(summary_path)?;
        let dir = summary_path.parent().unwrap_or(Path::new(""));
        artifact::require_exists(&summary.labels)?;
        let manifest = DatasetManifest::load(&summary.labels)?;
        for (objective, entry) in &summary.objectives {
            if entry.ap.is_none() {
                log::warn!("{}: no relevant items for '{objective}'; skipped", summary.method);
                continue;
            }
            let ranking = artifact::read_ranking(&dir.join(&entry.ranking))?;
            let Some(ev) = evaluate(&ranking, &manifest, *objective)? else {
                continue;
            };
            let path = out_dir.join(format!("{}_{objective}.csv", summary.method));
            artifact::write_pr_curve(&path, &provenance, &ev.curve)?;
            written.push(path);
        }
    }
    Ok(written)
}
