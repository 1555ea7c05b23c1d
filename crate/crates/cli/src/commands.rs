//! Subcommand implementations.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use relfilter::baseline::{rank_by_text_time, tweet_items};
use relfilter::data::{default_keywords, load_keywords};
use relfilter::dedup::{deduplicate, find_near_duplicates};
use relfilter::features::{open_image, EmbeddingBackend, OnnxBackend};
use relfilter::metrics::average_precision_tie_averaged;
use relfilter::retrieval::{rank_by_retrieval, KdeParams, QuerySet};
use relfilter::stream::{run_stream, FilterState, Scorer, StreamEvent};
use relfilter::svm::{cross_validate_c, rank_by_classifier, train_svm, LinearModel, TrainConfig};
use relfilter::{Backbone, DatasetManifest, Error, FeatureStore, FeatureVector, ImageRecord, Objective};
use serde::Serialize;
use serde_json::json;

use crate::artifact::{self, Provenance};
use crate::cli::*;
use crate::embed::{embed_manifest, embed_record, manifest_base};
use crate::error::{CliError, CliResult};
use crate::pipeline::{evaluate, export_pr, run_pipeline, PipelineConfig};

pub fn run(cli: Cli) -> CliResult<()> {
    let seed = cli.seed;
    if cli.config.is_some() && !matches!(cli.command, Command::Eval(_)) {
        log::warn!("--config is only read by `eval --mode`; ignored");
    }
    match cli.command {
        Command::Embed(a) => embed(&a, seed),
        Command::Dedup(a) => dedup(&a, seed),
        Command::Train(a) => train(&a, seed),
        Command::TuneC(a) => tune_c(&a, seed),
        Command::Rank(a) => rank(&a, seed),
        Command::Baseline(a) => baseline(&a, seed),
        Command::Eval(a) => eval(&a, cli.config.as_deref(), seed),
        Command::Stream(a) => stream(&a, seed),
        Command::ExportPr(a) => {
            for path in export_pr(&a.summary, &a.out_dir, seed)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn load_store(path: &Path) -> CliResult<FeatureStore> {
    artifact::require_exists(path)?;
    Ok(FeatureStore::load(path)?)
}

fn load_manifest(path: &Path) -> CliResult<DatasetManifest> {
    artifact::require_exists(path)?;
    Ok(DatasetManifest::load(path)?)
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializes"));
}

fn embed(a: &EmbedArgs, seed: u64) -> CliResult<()> {
    let provenance = Provenance::new(a, seed);
    artifact::require_exists(&a.model)?;
    let manifest = load_manifest(&a.manifest)?;
    let backend = OnnxBackend::load(&a.model)?;
    let (store, failures) =
        embed_manifest(&backend, &manifest, &manifest_base(&a.manifest), a.skip_errors)?;
    store.save_with_provenance(&a.out, Some(provenance.to_value()))?;
    print_json(&json!({
        "embedded": store.len(),
        "dim": store.dim(),
        "backend_tag": store.backend_tag(),
        "failures": failures,
    }));
    Ok(())
}

fn dedup(a: &DedupArgs, seed: u64) -> CliResult<()> {
    let provenance = Provenance::new(a, seed);
    let store = load_store(&a.store)?;
    let pairs = find_near_duplicates(&store, a.threshold)?;
    match &a.pairs_out {
        Some(path) => artifact::write_csv(path, &provenance, &pairs)?,
        None if !a.apply => {
            let mut out = csv::Writer::from_writer(io::stdout());
            for pair in &pairs {
                out.serialize(pair).map_err(|e| CliError::output("stdout", e))?;
            }
            out.flush().map_err(|e| CliError::output("stdout", e))?;
        }
        None => {}
    }
    if a.apply {
        let kept = deduplicate(&store, &pairs)?;
        log::info!("kept {} of {} images", kept.len(), store.len());
        match &a.kept_out {
            Some(path) => artifact::write_id_list(path, &provenance, &kept)?,
            None => {
                for id in &kept {
                    println!("{id}");
                }
            }
        }
        if let Some(path) = &a.store_out {
            store
                .subset(|id| kept.contains(id))
                .save_with_provenance(path, Some(provenance.to_value()))?;
        }
    }
    Ok(())
}

fn backbone_of(explicit: Option<Backbone>, store: &FeatureStore) -> Option<Backbone> {
    explicit.or_else(|| Backbone::from_tag(store.backend_tag()))
}

/// Labels of the manifest records that have features; others are skipped
/// with a warning.
fn labels_with_features(
    manifest: &DatasetManifest,
    store: &FeatureStore,
    objective: Objective,
) -> CliResult<BTreeMap<String, bool>> {
    let mut labels = manifest.binary_labels(objective);
    let before = labels.len();
    labels.retain(|id, _| store.contains(id));
    if labels.len() < before {
        log::warn!(
            "{} manifest records have no features and are left out",
            before - labels.len()
        );
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset.into());
    }
    Ok(labels)
}

fn train(a: &TrainArgs, seed: u64) -> CliResult<()> {
    let provenance = Provenance::new(a, seed);
    let store = load_store(&a.store)?;
    let manifest = load_manifest(&a.manifest)?;
    let c = match (a.c, backbone_of(a.backend, &store)) {
        (Some(c), _) => c,
        (None, Some(b)) => b.default_c(),
        (None, None) => {
            return Err(CliError::Usage(
                "--C is required when the backbone cannot be inferred".into(),
            ))
        }
    };
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        c,
        tolerance: a.tolerance.unwrap_or(defaults.tolerance),
        max_iterations: a.max_iterations.unwrap_or(defaults.max_iterations),
        seed,
    };
    let labels = labels_with_features(&manifest, &store, a.objective)?;
    let mut model = train_svm(&store, &labels, a.objective, &config)?;
    model.provenance = Some(provenance.to_value());
    model.save(&a.out)?;
    Ok(())
}

fn tune_c(a: &TuneCArgs, seed: u64) -> CliResult<()> {
    let provenance = Provenance::new(a, seed);
    let store = load_store(&a.store)?;
    let manifest = load_manifest(&a.manifest)?;
    let labels = labels_with_features(&manifest, &store, a.objective)?;
    let base = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let report = cross_validate_c(&store, &labels, &a.grid, a.folds, &base)?;
    let mut value = serde_json::to_value(&report).expect("report serializes");
    value["objective"] = json!(a.objective);
    value["provenance"] = provenance.to_value();
    match &a.out {
        Some(path) => artifact::write_json(path, &value)?,
        None => print_json(&value),
    }
    Ok(())
}

/// A query file is either a feature store or a list of ids found in `store`.
fn load_queries(
    path: &Path,
    objective: Objective,
    store: Option<&FeatureStore>,
) -> CliResult<QuerySet> {
    let raw = artifact::read_file(path)?;
    if FeatureStore::sniff(&raw) {
        let queries = FeatureStore::load(path)?;
        let items = queries.iter().map(|(id, v)| (id.to_string(), v.clone())).collect();
        return Ok(QuerySet::new(objective, items)?);
    }
    let ids = artifact::read_id_list(path)?;
    let store = store.ok_or_else(|| {
        CliError::Usage("an id list of queries needs a feature store to look them up".into())
    })?;
    Ok(QuerySet::from_store(objective, store, ids.iter().map(String::as_str))?)
}

fn gamma_for(explicit: Option<f64>, backend: Option<Backbone>, tag: &str) -> CliResult<KdeParams> {
    let gamma = match (explicit, backend.or_else(|| Backbone::from_tag(tag))) {
        (Some(g), _) => g,
        (None, Some(b)) => b.default_gamma(),
        (None, None) => {
            return Err(CliError::Usage(
                "--gamma is required when the backbone cannot be inferred".into(),
            ))
        }
    };
    Ok(KdeParams::new(gamma)?)
}

fn rank(a: &RankArgs, seed: u64) -> CliResult<()> {
    let provenance = Provenance::new(a, seed);
    let store = load_store(&a.store)?;
    let ranking = match a.mode {
        RankMode::Classification => {
            let path = a
                .model
                .as_ref()
                .ok_or_else(|| CliError::Usage("classification ranking needs --model".into()))?;
            artifact::require_exists(path)?;
            rank_by_classifier(&store, &LinearModel::load(path)?)?
        }
        RankMode::Retrieval => {
            let objective = a.objective.ok_or_else(|| {
                CliError::Usage("retrieval ranking needs --objective".into())
            })?;
            let queries = match (&a.queries, &a.manifest) {
                (Some(path), _) => load_queries(path, objective, Some(&store))?,
                (None, Some(path)) => {
                    let manifest = load_manifest(path)?;
                    let ids = manifest.query_ids(objective);
                    QuerySet::from_store(objective, &store, ids.iter().map(String::as_str))?
                }
                (None, None) => {
                    return Err(CliError::Usage(
                        "retrieval ranking needs --queries or --manifest".into(),
                    ))
                }
            };
            let params = gamma_for(a.gamma, a.backend, store.backend_tag())?;
            rank_by_retrieval(&store, &queries, &params)?
        }
    };
    artifact::write_ranking(&a.out, &provenance, &ranking)
}

fn baseline(a: &BaselineArgs, seed: u64) -> CliResult<()> {
    let provenance = Provenance::new(a, seed);
    let manifest = load_manifest(&a.manifest)?;
    let keywords = match &a.keywords {
        Some(path) => {
            artifact::require_exists(path)?;
            load_keywords(path)?
        }
        None => default_keywords(),
    };
    let ranking = rank_by_text_time(&tweet_items(&manifest), &keywords)?;
    artifact::write_ranking(&a.out, &provenance, &ranking)
}

fn pipeline_config(a: &EvalArgs, config: Option<&Path>, mode: crate::pipeline::Mode) -> CliResult<PipelineConfig> {
    let mut cfg = match config {
        Some(path) => PipelineConfig::from_toml(path)?,
        None => {
            let manifest = a.manifest.clone().ok_or_else(|| {
                CliError::Usage("eval --mode needs --manifest or --config".into())
            })?;
            PipelineConfig::new(mode, manifest, PathBuf::new())
        }
    };
    cfg.mode = mode;
    macro_rules! overlay {
        ($($field:ident),*) => {
            $(if let Some(v) = &a.$field {
                cfg.$field = Some(v.clone());
            })*
        };
    }
    overlay!(backend, store, test_manifest, test_store, embed_model, dedup_threshold, gamma, c, c_grid, keywords);
    if let Some(m) = &a.manifest {
        cfg.manifest = m.clone();
    }
    if !a.objective.is_empty() {
        cfg.objectives = a.objective.clone();
    }
    if let Some(dir) = &a.out_dir {
        cfg.out_dir = dir.clone();
    }
    if cfg.out_dir.as_os_str().is_empty() {
        return Err(CliError::Usage("eval --mode needs --out-dir".into()));
    }
    Ok(cfg)
}

fn with_suffix(path: &Path, objective: Objective) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{objective}.{ext}"))
}

fn eval(a: &EvalArgs, config: Option<&Path>, seed: u64) -> CliResult<()> {
    if let Some(mode) = a.mode {
        let cfg = pipeline_config(a, config, mode)?;
        let summary = run_pipeline(&cfg, seed)?;
        print_json(&summary);
        return Ok(());
    }
    if config.is_some() {
        return Err(CliError::Usage("--config needs eval --mode".into()));
    }
    let (Some(ranking_path), Some(manifest_path)) = (&a.ranking, &a.manifest) else {
        return Err(CliError::Usage(
            "eval needs --ranking and --manifest, or --mode".into(),
        ));
    };
    let provenance = Provenance::new(a, seed);
    let ranking = artifact::read_ranking(ranking_path)?;
    let manifest = load_manifest(manifest_path)?;
    let objectives = if a.objective.is_empty() {
        Objective::ALL.to_vec()
    } else {
        a.objective.clone()
    };

    let mut per_objective = serde_json::Map::new();
    let mut aps = BTreeMap::new();
    for &objective in &objectives {
        let Some(ev) = evaluate(&ranking, &manifest, objective)? else {
            per_objective.insert(objective.to_string(), serde_json::Value::Null);
            continue;
        };
        aps.insert(objective, ev.ap);
        if let Some(path) = &a.pr_out {
            let path = if objectives.len() == 1 {
                path.clone()
            } else {
                with_suffix(path, objective)
            };
            artifact::write_pr_curve(&path, &provenance, &ev.curve)?;
        }
        let mut entry = json!({
            "ap": ev.ap,
            "best_f1": ev.best.f1,
            "threshold": ev.best.threshold,
            "precision": ev.best.precision,
            "recall": ev.best.recall,
            "n_relevant": ev.n_relevant,
        });
        if a.tie_averaged {
            let relevant: BTreeSet<String> = manifest.relevant_ids(objective);
            entry["ap_tie_averaged"] = json!(average_precision_tie_averaged(&ranking, &relevant)?);
        }
        per_objective.insert(objective.to_string(), entry);
    }
    let map = if aps.is_empty() {
        None
    } else {
        Some(relfilter::metrics::mean_ap(&aps)?)
    };
    let mut summary = json!({
        "tool_version": provenance.tool_version,
        "config_hash": provenance.config_hash,
        "seed": seed,
        "map": map,
        "objectives": per_objective,
    });
    if objectives.len() == 1 {
        for key in ["ap", "best_f1", "threshold"] {
            summary[key] = per_objective
                .values()
                .next()
                .and_then(|v| v.get(key).cloned())
                .unwrap_or(serde_json::Value::Null);
        }
    }
    match &a.summary_out {
        Some(path) => artifact::write_json(path, &summary)?,
        None => print_json(&summary),
    }
    Ok(())
}

type Item = (String, relfilter::Result<FeatureVector>);

/// Turns stream records into feature vectors, from a store or by embedding.
struct Featurizer<'a> {
    store: Option<&'a FeatureStore>,
    backend: Option<&'a OnnxBackend>,
    base: PathBuf,
}

impl Featurizer<'_> {
    fn record(&self, record: &ImageRecord) -> relfilter::Result<FeatureVector> {
        if let Some(v) = self.store.and_then(|s| s.get(&record.id)) {
            return Ok(v.clone());
        }
        match self.backend {
            Some(backend) => embed_record(backend, record, &self.base),
            None => Err(Error::Validation(format!(
                "'{}' is not in the feature store",
                record.id
            ))),
        }
    }

    fn image(&self, path: &Path) -> relfilter::Result<FeatureVector> {
        let backend = self
            .backend
            .ok_or_else(|| Error::Param("image directories need --embed-model".into()))?;
        backend.embed(&open_image(path)?)
    }

    /// Lines of a JSON Lines manifest, parsed one at a time.
    fn lines<'s>(&'s self, reader: impl BufRead + 's, origin: String) -> impl Iterator<Item = Item> + 's {
        reader.lines().enumerate().filter_map(move |(i, line)| {
            let fallback = format!("{origin}:{}", i + 1);
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some((fallback, Err(Error::Data(e.to_string())))),
            };
            if line.trim().is_empty() {
                return None;
            }
            Some(match serde_json::from_str::<ImageRecord>(&line) {
                Ok(record) => {
                    let v = self.record(&record);
                    (record.id, v)
                }
                Err(e) => (
                    fallback,
                    Err(Error::Parse {
                        path: PathBuf::from(&origin),
                        line: i + 1,
                        message: e.to_string(),
                    }),
                ),
            })
        })
    }
}

fn stream(a: &StreamArgs, seed: u64) -> CliResult<()> {
    let provenance = Provenance::new(a, seed);
    let store = a.store.as_deref().map(load_store).transpose()?;
    let backend = match &a.embed_model {
        Some(path) => {
            artifact::require_exists(path)?;
            Some(OnnxBackend::load(path)?)
        }
        None => None,
    };
    if store.is_none() && backend.is_none() {
        return Err(CliError::Usage("stream needs --store or --embed-model".into()));
    }

    let scorer = match (&a.model, &a.queries) {
        (Some(path), None) => {
            artifact::require_exists(path)?;
            Scorer::Classifier(LinearModel::load(path)?)
        }
        (None, Some(path)) => {
            let objective = a
                .objective
                .ok_or_else(|| CliError::Usage("a retrieval filter needs --objective".into()))?;
            let queries = load_queries(path, objective, store.as_ref())?;
            let tag = store.as_ref().map_or("", |s| s.backend_tag());
            let params = gamma_for(a.gamma, a.backend, tag)?;
            Scorer::Retrieval { queries, params }
        }
        _ => {
            return Err(CliError::Usage(
                "stream needs exactly one of --model or --queries".into(),
            ))
        }
    };
    let mut state = FilterState::new(scorer, a.threshold)?;

    let mut sink: Box<dyn Write> = match &a.decisions_out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(io::stdout().lock()),
    };
    let mut write_error: Option<io::Error> = None;
    let mut emit = |event: StreamEvent| {
        if write_error.is_some() {
            return;
        }
        let line = serde_json::to_string(&event).expect("event serializes");
        if let Err(e) = writeln!(sink, "{line}") {
            write_error = Some(e);
        }
    };

    let input = a.input.as_str();
    let counters = if input == "-" {
        let featurizer = Featurizer {
            store: store.as_ref(),
            backend: backend.as_ref(),
            base: PathBuf::from("."),
        };
        let stdin = io::stdin().lock();
        run_stream(&mut state, featurizer.lines(stdin, "<stdin>".into()), &mut emit)
    } else {
        let path = Path::new(input);
        artifact::require_exists(path)?;
        if path.is_dir() {
            let featurizer = Featurizer {
                store: store.as_ref(),
                backend: backend.as_ref(),
                base: path.to_path_buf(),
            };
            let mut files: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| Error::Io {
                    path: path.to_path_buf(),
                    source: e,
                })?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            let items = files.into_iter().map(|file| {
                let id = file
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let v = match featurizer.store.and_then(|s| s.get(&id)) {
                    Some(v) => Ok(v.clone()),
                    None => featurizer.image(&file),
                };
                (id, v)
            });
            run_stream(&mut state, items, &mut emit)
        } else {
            let featurizer = Featurizer {
                store: store.as_ref(),
                backend: backend.as_ref(),
                base: manifest_base(path),
            };
            let file = File::open(path).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            run_stream(
                &mut state,
                featurizer.lines(BufReader::new(file), path.display().to_string()),
                &mut emit,
            )
        }
    };
    if let Some(e) = write_error {
        return Err(CliError::output("decision log", e));
    }
    sink.flush().map_err(|e| CliError::output("decision log", e))?;
    drop(sink);
    let report = json!({
        "accepted": counters.accepted,
        "rejected": counters.rejected,
        "failed": counters.failed,
        "threshold": a.threshold,
        "provenance": provenance.to_value(),
    });
    if a.decisions_out.is_some() {
        print_json(&report);
    } else {
        eprintln!("{report}");
    }
    Ok(())
}
