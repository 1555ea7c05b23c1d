//! Provenance stamping and the CSV/JSON artifact formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use relfilter::metrics::PrCurve;
use relfilter::RankedList;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    /// Hashes the JSON form of the effective configuration.
    pub fn new(config: &impl Serialize, seed: u64) -> Self {
        let json = serde_json::to_vec(config).expect("configuration serializes");
        Provenance {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: format!("{:x}", Sha256::digest(&json)),
            seed,
        }
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("provenance serializes")
    }

    /// First line of every CSV artifact.
    pub fn csv_comment(&self) -> String {
        format!(
            "# relfilter {} config={} seed={}",
            self.tool_version, self.config_hash, self.seed
        )
    }
}

/// Writes `rows` under a provenance comment and a header line.
pub fn write_csv<R: Serialize>(
    path: &Path,
    provenance: &Provenance,
    rows: impl IntoIterator<Item = R>,
) -> CliResult<()> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", provenance.csv_comment()).expect("write to vec");
    {
        let mut writer = csv::Writer::from_writer(&mut buf);
        for row in rows {
            writer
                .serialize(row)
                .map_err(|e| CliError::output(path.display().to_string(), e))?;
        }
        writer
            .flush()
            .map_err(|e| CliError::output(path.display().to_string(), e))?;
    }
    write_file(path, &buf)
}

/// Reads a CSV artifact, skipping `#` comment lines.
pub fn read_csv<R: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<R>> {
    let raw = read_file(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(raw.as_slice());
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| {
                CliError::Core(relfilter::Error::Parse {
                    path: path.to_path_buf(),
                    line: e.position().map_or(i + 2, |p| p.line() as usize),
                    message: e.to_string(),
                })
            })
        })
        .collect()
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut json = serde_json::to_vec_pretty(value).expect("artifact serializes");
    json.push(b'\n');
    write_file(path, &json)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| relfilter::Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, bytes).map_err(|e| {
        relfilter::Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into()
    })
}

/// Reads a whole input file; a missing file is a usage error naming it.
pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::MissingPath(path.to_path_buf()),
        _ => relfilter::Error::Io {
            path: path.to_path_buf(),
            source: e,
        }
        .into(),
    })
}

pub fn require_exists(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingPath(path.to_path_buf()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingRow {
    pub rank: usize,
    pub id: String,
    pub score: f64,
}

pub fn write_ranking(path: &Path, provenance: &Provenance, ranking: &RankedList) -> CliResult<()> {
    let rows = ranking
        .items()
        .iter()
        .enumerate()
        .map(|(i, (id, score))| RankingRow {
            rank: i + 1,
            id: id.clone(),
            score: *score,
        });
    write_csv(path, provenance, rows)
}

/// Reads a ranking in file order; `rank` must run 1, 2, ... .
pub fn read_ranking(path: &Path) -> CliResult<RankedList> {
    let rows: Vec<RankingRow> = read_csv(path)?;
    for (i, row) in rows.iter().enumerate() {
        if row.rank != i + 1 {
            return Err(relfilter::Error::Validation(format!(
                "{}: row {} has rank {}",
                path.display(),
                i + 1,
                row.rank
            ))
            .into());
        }
    }
    Ok(RankedList::from_ordered(
        rows.into_iter().map(|r| (r.id, r.score)).collect(),
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrRow {
    pub recall: f64,
    pub precision: f64,
}

pub fn write_pr_curve(path: &Path, provenance: &Provenance, curve: &PrCurve) -> CliResult<()> {
    let rows = curve.points.iter().map(|p| PrRow {
        recall: p.recall,
        precision: p.precision,
    });
    write_csv(path, provenance, rows)
}

/// One id per line; blank lines and `#` comments are ignored.
pub fn read_id_list(path: &Path) -> CliResult<Vec<String>> {
    let raw = read_file(path)?;
    let text = String::from_utf8(raw).map_err(|e| {
        relfilter::Error::Format(format!("{}: not UTF-8: {e}", path.display()))
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

pub fn write_id_list<'a>(
    path: &Path,
    provenance: &Provenance,
    ids: impl IntoIterator<Item = &'a String>,
) -> CliResult<()> {
    let mut out = format!("{}\n", provenance.csv_comment());
    for id in ids {
        out.push_str(id);
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}
