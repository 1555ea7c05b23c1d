//! Dataset manifests, relevance labels, query-set membership, keyword
//! matching and reproducible train/test splits.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The three information objectives an image can be relevant for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// The image shows the boundary between flooded and dry areas.
    Flooding,
    /// Objects of known height in the water allow estimating inundation depth.
    Depth,
    /// Visible contamination of the water, e.g. oil.
    Pollution,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Flooding, Objective::Depth, Objective::Pollution];

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Flooding => "flooding",
            Objective::Depth => "depth",
            Objective::Pollution => "pollution",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flooding" => Ok(Objective::Flooding),
            "depth" => Ok(Objective::Depth),
            "pollution" => Ok(Objective::Pollution),
            other => Err(Error::Param(format!(
                "unknown objective '{other}' (expected flooding, depth or pollution)"
            ))),
        }
    }
}

/// One line of a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<Objective, bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_of: Option<BTreeSet<Objective>>,
}

impl ImageRecord {
    pub fn new(id: impl Into<String>) -> Self {
        ImageRecord {
            id: id.into(),
            path: None,
            timestamp: None,
            text: None,
            labels: None,
            query_of: None,
        }
    }

    /// Missing labels count as "not relevant"; distractor images carry none.
    pub fn is_relevant(&self, objective: Objective) -> bool {
        self.labels
            .as_ref()
            .and_then(|l| l.get(&objective).copied())
            .unwrap_or(false)
    }

    pub fn is_query_for(&self, objective: Objective) -> bool {
        self.query_of
            .as_ref()
            .is_some_and(|q| q.contains(&objective))
    }

    fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Validation("record with empty id".into()));
        }
        if let Some(queries) = &self.query_of {
            for &objective in queries {
                if !self.is_relevant(objective) {
                    return Err(Error::Validation(format!(
                        "record '{}' is a {objective} query but not labelled relevant for it",
                        self.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// An ordered, id-unique list of image records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    records: Vec<ImageRecord>,
}

impl DatasetManifest {
    pub fn new(records: Vec<ImageRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            record.validate()?;
            if !seen.insert(record.id.as_str()) {
                return Err(Error::Validation(format!("duplicate id '{}'", record.id)));
            }
        }
        Ok(DatasetManifest { records })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file), path)
    }

    /// Parses JSON Lines; `origin` is only used in error messages.
    pub fn from_reader(reader: impl BufRead, origin: &Path) -> Result<Self> {
        let mut records = Vec::new();
        let mut seen = HashSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ImageRecord =
                serde_json::from_str(&line).map_err(|e| Error::Parse {
                    path: origin.to_path_buf(),
                    line: line_no,
                    message: e.to_string(),
                })?;
            record.validate().map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
            if !seen.insert(record.id.clone()) {
                return Err(Error::Validation(format!(
                    "duplicate id '{}' at {}:{line_no}",
                    record.id,
                    origin.display()
                )));
            }
            records.push(record);
        }
        Ok(DatasetManifest { records })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_to(&mut out).map_err(|e| Error::io(path, e))?;
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut *out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn records(&self) -> &[ImageRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ImageRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.id.as_str())
    }

    /// Ids labelled relevant for `objective`.
    pub fn relevant_ids(&self, objective: Objective) -> BTreeSet<String> {
        self.records
            .iter()
            .filter(|r| r.is_relevant(objective))
            .map(|r| r.id.clone())
            .collect()
    }

    /// Ids selected as ideal queries for `objective`.
    pub fn query_ids(&self, objective: Objective) -> BTreeSet<String> {
        self.records
            .iter()
            .filter(|r| r.is_query_for(objective))
            .map(|r| r.id.clone())
            .collect()
    }

    /// Binary labels for every record; unlabelled records are negatives.
    pub fn binary_labels(&self, objective: Objective) -> BTreeMap<String, bool> {
        self.records
            .iter()
            .map(|r| (r.id.clone(), r.is_relevant(objective)))
            .collect()
    }

    /// Keeps only records whose id satisfies `keep`, preserving order.
    pub fn filtered(&self, mut keep: impl FnMut(&str) -> bool) -> DatasetManifest {
        DatasetManifest {
            records: self
                .records
                .iter()
                .filter(|r| keep(&r.id))
                .cloned()
                .collect(),
        }
    }
}

/// A disjoint train/test partition of manifest ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train_ids: BTreeSet<String>,
    pub test_ids: BTreeSet<String>,
    pub seed: u64,
    pub train_fraction: f64,
}

/// Number of training items for `n` records, rounding half up.
pub fn train_size(n: usize, train_fraction: f64) -> usize {
    ((train_fraction * n as f64) + 0.5).floor() as usize
}

/// Shuffles the lexicographically sorted ids with ChaCha8 seeded by `seed`
/// and cuts after `round(train_fraction * n)` items.
pub fn split_dataset(manifest: &DatasetManifest, train_fraction: f64, seed: u64) -> Result<Split> {
    split_ids(manifest.ids(), train_fraction, seed)
}

pub fn split_ids<'a>(
    ids: impl IntoIterator<Item = &'a str>,
    train_fraction: f64,
    seed: u64,
) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Param(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut ids: Vec<&str> = ids.into_iter().collect();
    if ids.is_empty() {
        return Err(Error::EmptyDataset);
    }
    ids.sort_unstable();
    ids.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let cut = train_size(ids.len(), train_fraction).min(ids.len());
    Ok(Split {
        train_ids: ids[..cut].iter().map(|s| s.to_string()).collect(),
        test_ids: ids[cut..].iter().map(|s| s.to_string()).collect(),
        seed,
        train_fraction,
    })
}

/// Case-insensitive substring match of any keyword.
pub fn keyword_match<S: AsRef<str>>(text: Option<&str>, keywords: &[S]) -> bool {
    let Some(text) = text else {
        return false;
    };
    let haystack = text.to_lowercase();
    keywords.iter().any(|k| {
        let needle = k.as_ref().to_lowercase();
        !needle.is_empty() && haystack.contains(&needle)
    })
}

const DEFAULT_KEYWORDS: &str = include_str!("../config/keywords_de.txt");

/// Parses a keyword file: one term per line, `#` starts a comment line.
pub fn parse_keywords(contents: &str) -> Vec<String> {
    contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

/// The eight German flood keywords used to pre-filter tweets.
pub fn default_keywords() -> Vec<String> {
    parse_keywords(DEFAULT_KEYWORDS)
}

pub fn load_keywords(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_keywords(&contents))
}
