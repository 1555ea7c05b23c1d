//! Fixture data and helpers shared by the CLI tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use relfilter::{FeatureStore, Objective};
use serde_json::json;

pub const DIM: usize = 12;
pub const COUNT: usize = 60;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn relevant(i: usize, objective: Objective) -> bool {
    match objective {
        Objective::Flooding => i.is_multiple_of(3),
        Objective::Depth => i.is_multiple_of(5),
        Objective::Pollution => i.is_multiple_of(12),
    }
}

/// Manifest lines and feature store of the fixture dataset.
pub fn generate() -> (String, FeatureStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(2013);
    let noise = Normal::new(0.0, 0.45).unwrap();
    let centers: Vec<Vec<f64>> = (0..3)
        .map(|k| (0..DIM).map(|j| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut store = FeatureStore::new(DIM, "resnet50-fixture");
    let mut manifest = String::new();
    let mut queries_left = [2usize; 3];
    for i in 0..COUNT {
        let id = format!("img{i:03}");
        let mut v: Vec<f64> = (0..DIM).map(|_| noise.sample(&mut rng)).collect();
        let mut labels = serde_json::Map::new();
        let mut query_of = Vec::new();
        for (k, objective) in Objective::ALL.into_iter().enumerate() {
            let rel = relevant(i, objective);
            labels.insert(objective.to_string(), json!(rel));
            if rel {
                for (vj, cj) in v.iter_mut().zip(&centers[k]) {
                    *vj += cj;
                }
                if queries_left[k] > 0 {
                    queries_left[k] -= 1;
                    query_of.push(objective.to_string());
                }
            }
        }
        v[DIM - 1] += 0.5;
        store.insert_raw(id.clone(), &v).unwrap();

        let minutes = 600 + 7 * i + rng.gen_range(0..5);
        let text = if relevant(i, Objective::Flooding) || rng.gen_bool(0.3) {
            format!("Hochwasser an der Innenstadt, Foto {i}")
        } else {
            format!("Sonniger Tag am See, Bild {i}")
        };
        let mut record = json!({
            "id": id,
            "path": format!("images/{id}.png"),
            "timestamp": format!("2013-06-0{}T{:02}:{:02}:00Z", 2 + minutes / 1440, (minutes / 60) % 24, minutes % 60),
            "text": text,
            "labels": labels,
        });
        if !query_of.is_empty() {
            record["query_of"] = json!(query_of);
        }
        manifest.push_str(&record.to_string());
        manifest.push('\n');
    }
    (manifest, store)
}

/// Copies the shipped fixture files into `dir`.
pub fn install(dir: &Path) {
    for name in ["manifest.jsonl", "features.fvs", "features.fvs.meta.json"] {
        std::fs::copy(fixtures_dir().join(name), dir.join(name)).unwrap();
    }
}

pub fn relfilter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relfilter"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON on stderr: {text}"));
    serde_json::from_str(line).unwrap()
}

pub fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// AP by direct counting over a ranked relevance list.
pub fn oracle_ap(relevance: &[bool]) -> f64 {
    let total = relevance.iter().filter(|&&r| r).count();
    let mut sum = 0.0;
    for k in 0..relevance.len() {
        if relevance[k] {
            let hits = relevance[..=k].iter().filter(|&&r| r).count();
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    sum / total as f64
}

/// `(id, score)` rows of a ranking CSV, skipping comment lines.
pub fn read_ranking(path: &Path) -> Vec<(String, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[1].to_string(), cols[2].parse().unwrap())
        })
        .collect()
}

/// `(recall, precision)` rows of a PR curve CSV.
pub fn read_curve(path: &Path) -> Vec<(f64, f64)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let (r, p) = l.split_once(',').unwrap();
            (r.parse().unwrap(), p.parse().unwrap())
        })
        .collect()
}
