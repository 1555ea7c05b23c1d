//! Near-duplicate detection over a feature store.
//!
//! Pairs above a cosine-similarity threshold are reported for manual review;
//! [`deduplicate`] then keeps the lexicographically smallest id of every
//! connected component of the pair graph.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::FeatureStore;
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicatePair {
    /// Always the lexicographically smaller id.
    pub id_a: String,
    pub id_b: String,
    pub similarity: f64,
}

/// All pairs with cosine similarity ≥ `threshold`, most similar first.
pub fn find_near_duplicates(store: &FeatureStore, threshold: f64) -> Result<Vec<DuplicatePair>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Param(format!(
            "similarity threshold must lie in (0, 1], got {threshold}"
        )));
    }
    if store.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rows: Vec<(&str, Vec<f64>)> = store
        .iter()
        .map(|(id, v)| (id, v.as_slice().iter().map(|&x| f64::from(x)).collect()))
        .collect();

    let mut pairs: Vec<DuplicatePair> = (0..rows.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (id_i, xi) = &rows[i];
            rows[i + 1..].iter().filter_map(move |(id_j, xj)| {
                let sim: f64 = xi.iter().zip(xj).map(|(a, b)| a * b).sum();
                // unit vectors, so the dot product is the cosine
                (sim >= threshold).then(|| {
                    let (a, b) = if id_i < id_j { (id_i, id_j) } else { (id_j, id_i) };
                    DuplicatePair {
                        id_a: a.to_string(),
                        id_b: b.to_string(),
                        similarity: sim,
                    }
                })
            })
        })
        .collect();

    pairs.sort_by(|p, q| {
        q.similarity
            .total_cmp(&p.similarity)
            .then_with(|| p.id_a.cmp(&q.id_a))
            .then_with(|| p.id_b.cmp(&q.id_b))
    });
    Ok(pairs)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller index (= smaller id, ids are sorted) becomes the root
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Ids surviving duplicate removal: one representative per component.
pub fn deduplicate(store: &FeatureStore, pairs: &[DuplicatePair]) -> Result<BTreeSet<String>> {
    let mut ids: Vec<&str> = store.ids().collect();
    ids.sort_unstable();
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Validation(format!("pair refers to unknown id '{id}'")))
    };

    let mut uf = UnionFind::new(ids.len());
    for pair in pairs {
        let (a, b) = (lookup(&pair.id_a)?, lookup(&pair.id_b)?);
        uf.union(a, b);
    }
    Ok((0..ids.len())
        .filter(|&i| uf.find(i) == i)
        .map(|i| ids[i].to_string())
        .collect())
}
