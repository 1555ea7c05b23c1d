//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use relfilter::{Backbone, Objective};
use serde::Serialize;

use crate::pipeline::Mode;

#[derive(Debug, Parser)]
#[command(name = "relfilter", version, about = "Content-based relevance filtering of flood images")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Pipeline configuration (TOML) for `eval --mode`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// More log output; repeat for debug level.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed manifest images into a feature store.
    Embed(EmbedArgs),
    /// Find near-duplicate images.
    Dedup(DedupArgs),
    /// Train a linear SVM for one objective.
    Train(TrainArgs),
    /// Pick C by k-fold cross-validation.
    TuneC(TuneCArgs),
    /// Rank a feature store by classifier score or KDE similarity.
    Rank(RankArgs),
    /// Rank tweets with the keyword and posting-time baseline.
    Baseline(BaselineArgs),
    /// Evaluate a ranking, or run a full pipeline with `--mode`.
    Eval(EvalArgs),
    /// Filter a stream of items with a fixed threshold.
    Stream(StreamArgs),
    /// Write one PR curve CSV per method and objective.
    ExportPr(ExportPrArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EmbedArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Leave out images that fail to decode instead of aborting.
    #[arg(long)]
    pub skip_errors: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct DedupArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value_t = relfilter::dedup::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Suspect pairs for review: id_a,id_b,similarity.
    #[arg(long)]
    pub pairs_out: Option<PathBuf>,
    /// Also write the ids kept after merging duplicates.
    #[arg(long)]
    pub apply: bool,
    /// Kept-id list (with --apply); defaults to stdout.
    #[arg(long, requires = "apply")]
    pub kept_out: Option<PathBuf>,
    /// Store restricted to the kept ids (with --apply).
    #[arg(long, requires = "apply")]
    pub store_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub objective: Objective,
    /// Regularization constant; defaults to the backbone's published value.
    #[arg(long = "C", alias = "c")]
    pub c: Option<f64>,
    #[arg(long)]
    pub backend: Option<Backbone>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TuneCArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub objective: Objective,
    #[arg(long, value_delimiter = ',', default_value = "0.005,0.5,2.5")]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Report file; defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RankArgs {
    #[arg(long, value_enum)]
    pub mode: RankMode,
    #[arg(long)]
    pub store: PathBuf,
    /// Trained model (classification).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Query store, or a list of ids looked up in --store (retrieval).
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Take the query images of --objective from this manifest (retrieval).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub backend: Option<Backbone>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    Classification,
    Retrieval,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// One keyword per line; the built-in German flood keywords otherwise.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Run the whole pipeline in this mode instead of scoring a ranking.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub ranking: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Objectives to evaluate; all three by default.
    #[arg(long, value_delimiter = ',')]
    pub objective: Vec<Objective>,
    #[arg(long)]
    pub pr_out: Option<PathBuf>,
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
    /// Also report AP averaged over orderings of tied scores.
    #[arg(long)]
    pub tie_averaged: bool,

    #[arg(long)]
    pub backend: Option<Backbone>,
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long)]
    pub test_manifest: Option<PathBuf>,
    #[arg(long)]
    pub test_store: Option<PathBuf>,
    #[arg(long)]
    pub embed_model: Option<PathBuf>,
    #[arg(long)]
    pub dedup_threshold: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "C", alias = "c")]
    pub c: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub c_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StreamArgs {
    /// Trained classifier.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Query store or id list for a retrieval filter.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long)]
    pub objective: Option<Objective>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub backend: Option<Backbone>,
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: f64,
    /// Manifest file, `-` for a manifest on stdin, or a directory of images.
    #[arg(long = "in")]
    pub input: String,
    /// Precomputed features looked up by id.
    #[arg(long)]
    pub store: Option<PathBuf>,
    /// Embed images on the fly with this model.
    #[arg(long)]
    pub embed_model: Option<PathBuf>,
    /// Decision log (JSON Lines); defaults to stdout.
    #[arg(long)]
    pub decisions_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportPrArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub summary: Vec<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}
