//! Retrieval-based relevance: kernel density of an image embedding with
//! respect to a fixed set of ideal query embeddings,
//! `sim(x, Q) = 1/|Q| Σ_q exp(−γ‖x − q‖²)`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Objective;
use crate::features::{check_dim, FeatureStore, FeatureVector};
use crate::metrics::{average_precision, mean_ap, RankedList};
use crate::{Error, Result};

/// Default γ grid searched by [`tune_gamma`].
pub const GAMMA_GRID: [f64; 9] = [0.5, 1.0, 2.0, 2.5, 5.0, 7.5, 10.0, 15.0, 20.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeParams {
    gamma: f64,
}

impl KdeParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Param(format!("gamma must be positive, got {gamma}")));
        }
        Ok(KdeParams { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The ideal queries of one objective.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    objective: Objective,
    ids: Vec<String>,
    vectors: Vec<FeatureVector>,
}

impl QuerySet {
    pub fn new(objective: Objective, queries: Vec<(String, FeatureVector)>) -> Result<Self> {
        let Some(dim) = queries.first().map(|(_, v)| v.dim()) else {
            return Err(Error::Validation(format!("empty query set for {objective}")));
        };
        for (_, v) in &queries {
            check_dim(dim, v.dim())?;
        }
        let (ids, vectors) = queries.into_iter().unzip();
        Ok(QuerySet {
            objective,
            ids,
            vectors,
        })
    }

    /// Collects the vectors of `ids` from `store`.
    pub fn from_store<'a>(
        objective: Objective,
        store: &FeatureStore,
        ids: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let queries = ids
            .into_iter()
            .map(|id| {
                store
                    .get(id)
                    .cloned()
                    .map(|v| (id.to_string(), v))
                    .ok_or_else(|| Error::Validation(format!("query '{id}' missing from store")))
            })
            .collect::<Result<Vec<_>>>()?;
        QuerySet::new(objective, queries)
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[FeatureVector] {
        &self.vectors
    }
}

/// Mean of `exp(−γ d²)` over the given squared distances.
pub fn kernel_mean(squared_distances: &[f64], params: &KdeParams) -> f64 {
    let sum: f64 = squared_distances
        .iter()
        .map(|d2| (-params.gamma * d2).exp())
        .sum();
    sum / squared_distances.len() as f64
}

/// Mean Gaussian kernel between `x` and every query, in double precision.
pub fn kde_similarity(x: &FeatureVector, queries: &QuerySet, params: &KdeParams) -> Result<f64> {
    check_dim(queries.dim(), x.dim())?;
    let d2 = queries
        .vectors
        .iter()
        .map(|q| x.squared_distance(q))
        .collect::<Result<Vec<_>>>()?;
    Ok(kernel_mean(&d2, params))
}

/// Ranks every store entry that is not itself a query by KDE similarity.
pub fn rank_by_retrieval(
    store: &FeatureStore,
    queries: &QuerySet,
    params: &KdeParams,
) -> Result<RankedList> {
    if store.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_dim(store.dim(), queries.dim())?;
    let exclude: HashSet<&str> = queries.ids.iter().map(String::as_str).collect();
    let entries: Vec<(&str, &FeatureVector)> =
        store.iter().filter(|(id, _)| !exclude.contains(id)).collect();
    let scores = entries
        .par_iter()
        .map(|(id, v)| kde_similarity(v, queries, params).map(|s| (id.to_string(), s)))
        .collect::<Result<Vec<_>>>()?;
    RankedList::from_scores(scores)
}

/// Picks γ from `grid` maximizing training mAP over the given objectives;
/// ties go to the smaller γ. Returns the chosen γ and the mAP per grid value.
pub fn tune_gamma(
    store: &FeatureStore,
    tasks: &[(QuerySet, BTreeSet<String>)],
    grid: &[f64],
) -> Result<(f64, Vec<(f64, f64)>)> {
    if grid.is_empty() || tasks.is_empty() {
        return Err(Error::Param("gamma tuning needs a grid and at least one task".into()));
    }
    let mut table = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    for gamma in sorted {
        let params = KdeParams::new(gamma)?;
        let mut aps = BTreeMap::new();
        for (i, (queries, relevant)) in tasks.iter().enumerate() {
            let ranking = rank_by_retrieval(store, queries, &params)?;
            aps.insert(i, average_precision(&ranking, relevant)?);
        }
        let map = mean_ap(&aps)?;
        table.push((gamma, map));
        if best.is_none_or(|(_, m)| map > m) {
            best = Some((gamma, map));
        }
    }
    Ok((best.expect("grid is nonempty").0, table))
}
