//! Binary linear SVMs trained by dual coordinate descent.
//!
//! The solver minimizes the hinge-loss primal
//!
//! ```text
//! P(w, b) = ½‖(w, b)‖² + C Σᵢ max(0, 1 − yᵢ (w·xᵢ + b))
//! ```
//!
//! where the bias is folded into the weight vector by appending a constant 1
//! to every example (so it is regularized too). The dual
//! `D(α) = ½ αᵀQα − Σα`, `0 ≤ α ≤ C`, has no equality constraint in this
//! form and is minimized one coordinate at a time with the shrinking
//! heuristic of Hsieh et al. (2008).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Objective;
use crate::features::{check_dim, FeatureStore, FeatureVector};
use crate::metrics::{average_precision_of, RankedList};
use crate::{Error, Result};

/// Solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(rename = "C")]
    pub c: f64,
    /// Stop once the largest projected-gradient violation drops to this value.
    pub tolerance: f64,
    /// Upper bound on outer epochs.
    pub max_iterations: usize,
    /// Seeds the per-epoch permutation of examples.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            tolerance: 1e-3,
            max_iterations: 1000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_c(c: f64) -> Self {
        TrainConfig {
            c,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Param(format!("C must be positive, got {}", self.c)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Param(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Param("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Objective values recorded after each outer epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub primal: f64,
    /// Dual objective in minimization form, `½‖w(α)‖² − Σα`.
    pub dual: f64,
    pub max_violation: f64,
    pub active: usize,
}

/// Raw solver output on an explicit problem.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Weights followed by the bias.
    pub augmented_weights: Vec<f64>,
    pub alpha: Vec<f64>,
    pub history: Vec<EpochStats>,
    pub converged: bool,
}

impl Solution {
    pub fn weights(&self) -> &[f64] {
        &self.augmented_weights[..self.augmented_weights.len() - 1]
    }

    pub fn bias(&self) -> f64 {
        *self.augmented_weights.last().expect("augmented weights")
    }

    pub fn primal(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.primal)
    }
}

fn dot_aug(w: &[f64], x: &[f32]) -> f64 {
    let dim = x.len();
    let mut s = w[dim];
    for (wi, &xi) in w[..dim].iter().zip(x) {
        s += wi * f64::from(xi);
    }
    s
}

/// `P(w̃)` for augmented weights over rows `x` with labels `y ∈ {−1, +1}`.
pub fn primal_objective(augmented_weights: &[f64], x: &[&[f32]], y: &[f64], c: f64) -> f64 {
    let reg = 0.5 * augmented_weights.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (1.0 - yi * dot_aug(augmented_weights, xi)).max(0.0))
        .sum();
    reg + c * loss
}

fn dual_objective(augmented_weights: &[f64], alpha: &[f64]) -> f64 {
    0.5 * augmented_weights.iter().map(|v| v * v).sum::<f64>() - alpha.iter().sum::<f64>()
}

/// Dual coordinate descent on rows `x` (without the bias column) and
/// labels `y ∈ {−1, +1}`.
pub fn solve(x: &[&[f32]], y: &[f64], config: &TrainConfig) -> Result<Solution> {
    config.validate()?;
    let n = x.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if y.len() != n {
        return Err(Error::Shape {
            expected: n,
            actual: y.len(),
        });
    }
    let dim = x[0].len();
    for (i, row) in x.iter().enumerate() {
        check_dim(dim, row.len())?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite feature in example {i}")));
        }
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::Data(format!("label {bad} is not ±1")));
    }
    let has_pos = y.iter().any(|&v| v > 0.0);
    let has_neg = y.iter().any(|&v| v < 0.0);
    if !(has_pos && has_neg) {
        return Err(Error::DegenerateTraining(
            "training data must contain both classes".into(),
        ));
    }

    let c = config.c;
    let eps = config.tolerance;
    // diagonal of Q: ‖x̃ᵢ‖² including the bias column
    let qd: Vec<f64> = x
        .iter()
        .map(|row| 1.0 + row.iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>())
        .collect();

    let mut w = vec![0.0; dim + 1];
    let mut alpha = vec![0.0; n];
    let mut index: Vec<usize> = (0..n).collect();
    let mut active = n;
    let mut pg_max_old = f64::INFINITY;
    let mut pg_min_old = f64::NEG_INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_iterations {
        index[..active].shuffle(&mut rng);
        let mut pg_max_new = f64::NEG_INFINITY;
        let mut pg_min_new = f64::INFINITY;

        let mut s = 0;
        while s < active {
            let i = index[s];
            let g = y[i] * dot_aug(&w, x[i]) - 1.0;
            let mut pg = 0.0;
            if alpha[i] == 0.0 {
                if g > pg_max_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g < 0.0 {
                    pg = g;
                }
            } else if alpha[i] == c {
                if g < pg_min_old {
                    active -= 1;
                    index.swap(s, active);
                    continue;
                } else if g > 0.0 {
                    pg = g;
                }
            } else {
                pg = g;
            }
            pg_max_new = pg_max_new.max(pg);
            pg_min_new = pg_min_new.min(pg);

            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qd[i]).clamp(0.0, c);
                let d = (alpha[i] - old) * y[i];
                for (wj, &xj) in w[..dim].iter_mut().zip(x[i]) {
                    *wj += d * f64::from(xj);
                }
                w[dim] += d;
            }
            s += 1;
        }

        let violation = pg_max_new - pg_min_new;
        history.push(EpochStats {
            primal: primal_objective(&w, x, y, c),
            dual: dual_objective(&w, &alpha),
            max_violation: violation.max(0.0),
            active,
        });

        if violation <= eps {
            if active == n {
                converged = true;
                break;
            }
            // converged on the shrunk set; re-check every example
            active = n;
            pg_max_old = f64::INFINITY;
            pg_min_old = f64::NEG_INFINITY;
            continue;
        }
        pg_max_old = if pg_max_new <= 0.0 {
            f64::INFINITY
        } else {
            pg_max_new
        };
        pg_min_old = if pg_min_new >= 0.0 {
            f64::NEG_INFINITY
        } else {
            pg_min_new
        };
    }
    if !converged {
        log::warn!(
            "dual coordinate descent stopped after {} epochs without reaching tolerance {eps}",
            config.max_iterations
        );
    }

    Ok(Solution {
        augmented_weights: w,
        alpha,
        history,
        converged,
    })
}

/// A trained linear scorer for one objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub objective: Objective,
    pub backend_tag: String,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub train_objective_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl LinearModel {
    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim, self.weights.len())?;
        if self.weights.iter().any(|v| !v.is_finite()) || !self.bias.is_finite() {
            return Err(Error::Data("model has non-finite weights".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let model: LinearModel = serde_json::from_slice(&raw).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut json = serde_json::to_vec_pretty(self).expect("model serializes");
        json.push(b'\n');
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// Collects rows and ±1 labels for the ids in `labels`, in id order.
fn gather<'a>(
    features: &'a FeatureStore,
    labels: &BTreeMap<String, bool>,
) -> Result<(Vec<&'a [f32]>, Vec<f64>)> {
    let mut x = Vec::with_capacity(labels.len());
    let mut y = Vec::with_capacity(labels.len());
    for (id, &positive) in labels {
        let v = features
            .get(id)
            .ok_or_else(|| Error::Validation(format!("labelled id '{id}' has no features")))?;
        x.push(v.as_slice());
        y.push(if positive { 1.0 } else { -1.0 });
    }
    Ok((x, y))
}

/// Trains the SVM of `objective` on every id in `labels`
/// (`true` = relevant, `false` = not relevant).
pub fn train_svm(
    features: &FeatureStore,
    labels: &BTreeMap<String, bool>,
    objective: Objective,
    config: &TrainConfig,
) -> Result<LinearModel> {
    let (x, y) = gather(features, labels)?;
    let solution = solve(&x, &y, config)?;
    Ok(LinearModel {
        objective,
        backend_tag: features.backend_tag().to_string(),
        dim: features.dim(),
        weights: solution.weights().to_vec(),
        bias: solution.bias(),
        c: config.c,
        train_objective_value: solution.primal(),
        provenance: None,
    })
}

/// `w·x + b`.
pub fn svm_score(model: &LinearModel, x: &FeatureVector) -> Result<f64> {
    check_dim(model.dim, x.dim())?;
    Ok(model
        .weights
        .iter()
        .zip(x.as_slice())
        .map(|(w, &v)| w * f64::from(v))
        .sum::<f64>()
        + model.bias)
}

/// Ranks every entry of `store` by its SVM score.
pub fn rank_by_classifier(store: &FeatureStore, model: &LinearModel) -> Result<RankedList> {
    if store.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_dim(model.dim, store.dim())?;
    let entries: Vec<(&str, &FeatureVector)> = store.iter().collect();
    let scores = entries
        .par_iter()
        .map(|(id, v)| svm_score(model, v).map(|s| (id.to_string(), s)))
        .collect::<Result<Vec<_>>>()?;
    RankedList::from_scores(scores)
}

/// Result of the C grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    #[serde(rename = "C")]
    pub chosen_c: f64,
    /// `(C, mean validation AP)` for each grid value, ascending C.
    pub table: Vec<(f64, f64)>,
    pub folds: usize,
    pub stratified: bool,
}

/// Assigns each example to one of `k` folds such that every fold holds
/// both classes. Returns the fold index per example and whether the
/// stratified fallback was needed.
pub fn assign_folds(y: &[f64], k: usize, seed: u64) -> Result<(Vec<usize>, bool)> {
    if k < 2 {
        return Err(Error::Param(format!("need at least 2 folds, got {k}")));
    }
    let n = y.len();
    let positives = y.iter().filter(|&&v| v > 0.0).count();
    let negatives = n - positives;
    if positives < k || negatives < k {
        return Err(Error::Stratification(format!(
            "{positives} positives and {negatives} negatives cannot fill {k} folds"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut folds = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        folds[i] = pos % k;
    }
    let complete = (0..k).all(|f| {
        let mut classes = (false, false);
        for (i, &fi) in folds.iter().enumerate() {
            if fi == f {
                if y[i] > 0.0 {
                    classes.0 = true;
                } else {
                    classes.1 = true;
                }
            }
        }
        classes.0 && classes.1
    });
    if complete {
        return Ok((folds, false));
    }
    // stratified redraw: deal each class round-robin from a random start
    for class in [1.0, -1.0] {
        let mut members: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
        members.shuffle(&mut rng);
        let offset = rng.gen_range(0..k);
        for (pos, &i) in members.iter().enumerate() {
            folds[i] = (pos + offset) % k;
        }
    }
    Ok((folds, true))
}

/// k-fold cross-validation of C by mean validation AP; ties go to the
/// smaller C.
pub fn cross_validate_c(
    features: &FeatureStore,
    labels: &BTreeMap<String, bool>,
    grid: &[f64],
    k: usize,
    base: &TrainConfig,
) -> Result<CvReport> {
    if grid.is_empty() {
        return Err(Error::Param("empty C grid".into()));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let (x, y) = gather(features, labels)?;
    let (folds, stratified) = assign_folds(&y, k, base.seed)?;

    let mut table = Vec::with_capacity(grid.len());
    for &c in &grid {
        let config = TrainConfig { c, ..base.clone() };
        let aps = (0..k)
            .into_par_iter()
            .map(|fold| {
                let (train_x, train_y): (Vec<&[f32]>, Vec<f64>) = (0..x.len())
                    .filter(|&i| folds[i] != fold)
                    .map(|i| (x[i], y[i]))
                    .unzip();
                let sol = solve(&train_x, &train_y, &config)?;
                let mut held_out: Vec<(f64, bool)> = (0..x.len())
                    .filter(|&i| folds[i] == fold)
                    .map(|i| (dot_aug(&sol.augmented_weights, x[i]), y[i] > 0.0))
                    .collect();
                // stable sort keeps id order among equal scores
                held_out.sort_by(|a, b| b.0.total_cmp(&a.0));
                let relevance: Vec<bool> = held_out.iter().map(|(_, r)| *r).collect();
                average_precision_of(&relevance)
            })
            .collect::<Result<Vec<f64>>>()?;
        table.push((c, aps.iter().sum::<f64>() / k as f64));
    }

    let mut chosen = table[0];
    for &entry in &table[1..] {
        if entry.1 > chosen.1 {
            chosen = entry;
        }
    }
    Ok(CvReport {
        chosen_c: chosen.0,
        table,
        folds: k,
        stratified,
    })
}

/// Ids of `labels` with the given class, handy for building label maps.
pub fn class_ids(labels: &BTreeMap<String, bool>, positive: bool) -> BTreeSet<String> {
    labels
        .iter()
        .filter(|(_, &l)| l == positive)
        .map(|(id, _)| id.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn rows(v: &[Vec<f32>]) -> Vec<&[f32]> {
        v.iter().map(Vec::as_slice).collect()
    }

    fn tight(c: f64) -> TrainConfig {
        TrainConfig {
            c,
            tolerance: 1e-10,
            max_iterations: 100_000,
            seed: 1,
        }
    }

    #[test]
    fn max_margin_two_points() {
        let data = vec![vec![1.0f32, 0.0], vec![-1.0, 0.0]];
        let sol = solve(&rows(&data), &[1.0, -1.0], &tight(100.0)).unwrap();
        assert!((sol.weights()[0] - 1.0).abs() < 1e-3);
        assert!(sol.weights()[1].abs() < 1e-3);
        assert!(sol.bias().abs() < 1e-3);
        assert!(sol.converged);
    }

    fn blobs(n: usize, seed: u64, sep: f32) -> (Vec<Vec<f32>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0f32, 0.3).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = if i % 2 == 0 { 1.0 } else { -1.0 };
            let center = sep * label as f32;
            x.push(vec![center + noise.sample(&mut rng), noise.sample(&mut rng)]);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn separable_blobs_have_no_training_errors() {
        let (x, y) = blobs(40, 9, 2.0);
        let sol = solve(&rows(&x), &y, &TrainConfig::with_c(10.0)).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!(yi * dot_aug(&sol.augmented_weights, xi) > 0.0);
        }
    }

    #[test]
    fn duplicating_all_points_keeps_the_boundary() {
        let (x, y) = blobs(30, 4, 2.0);
        let doubled_x: Vec<Vec<f32>> = x.iter().chain(&x).cloned().collect();
        let doubled_y: Vec<f64> = y.iter().chain(&y).copied().collect();
        let a = solve(&rows(&x), &y, &tight(100.0)).unwrap();
        let b = solve(&rows(&doubled_x), &doubled_y, &tight(100.0)).unwrap();
        for gx in -10..=10 {
            for gy in -10..=10 {
                let p = [gx as f32 * 0.3, gy as f32 * 0.3];
                let sa = dot_aug(&a.augmented_weights, &p);
                let sb = dot_aug(&b.augmented_weights, &p);
                if sa.abs() > 1e-6 {
                    assert_eq!(sa > 0.0, sb > 0.0, "probe {p:?}");
                }
            }
        }
    }

    #[test]
    fn redundant_non_support_duplicate_changes_nothing() {
        let (x, y) = blobs(30, 6, 2.0);
        let base = solve(&rows(&x), &y, &tight(1.0)).unwrap();
        let idx = (0..x.len())
            .find(|&i| base.alpha[i] == 0.0 && y[i] * dot_aug(&base.augmented_weights, &x[i]) > 1.0)
            .expect("a non-support point");
        let mut x2 = x.clone();
        let mut y2 = y.clone();
        x2.push(x[idx].clone());
        y2.push(y[idx]);
        let more = solve(&rows(&x2), &y2, &tight(1.0)).unwrap();
        for gx in -10..=10 {
            for gy in -10..=10 {
                let p = [gx as f32 * 0.3, gy as f32 * 0.3];
                let sa = dot_aug(&base.augmented_weights, &p);
                let sb = dot_aug(&more.augmented_weights, &p);
                if sa.abs() > 1e-6 {
                    assert_eq!(sa > 0.0, sb > 0.0);
                }
            }
        }
    }

    #[test]
    fn dual_feasibility_and_monotone_dual() {
        let (x, y) = blobs(50, 12, 0.5);
        let c = 0.7;
        let sol = solve(&rows(&x), &y, &TrainConfig::with_c(c)).unwrap();
        assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        for w in sol.history.windows(2) {
            assert!(w[1].dual <= w[0].dual + 1e-12);
        }
        let last = sol.history.last().unwrap();
        // weak duality: primal + dual(min form) is the duality gap
        assert!(last.primal + last.dual >= -1e-9);
    }

    #[test]
    fn input_errors() {
        let x = vec![vec![1.0f32], vec![2.0]];
        assert!(matches!(
            solve(&rows(&x), &[1.0, 1.0], &TrainConfig::default()),
            Err(Error::DegenerateTraining(_))
        ));
        let bad = vec![vec![f32::NAN], vec![2.0]];
        assert!(matches!(
            solve(&rows(&bad), &[1.0, -1.0], &TrainConfig::default()),
            Err(Error::Data(_))
        ));
        assert!(solve(&rows(&x), &[1.0, -1.0], &TrainConfig::with_c(0.0)).is_err());
        assert!(solve(&rows(&x), &[1.0, 0.0], &TrainConfig::default()).is_err());
    }

    fn toy_model() -> LinearModel {
        LinearModel {
            objective: Objective::Flooding,
            backend_tag: "t".into(),
            dim: 2,
            weights: vec![2.0, -1.0],
            bias: 0.5,
            c: 1.0,
            train_objective_value: 0.0,
            provenance: None,
        }
    }

    #[test]
    fn score_arithmetic() {
        let m = toy_model();
        let x = FeatureVector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(svm_score(&m, &x).unwrap(), 1.5);
        let on_boundary = FeatureVector::new(vec![0.0, 0.5]).unwrap();
        assert_eq!(svm_score(&m, &on_boundary).unwrap(), 0.0);
        let wrong = FeatureVector::new(vec![1.0]).unwrap();
        assert!(matches!(svm_score(&m, &wrong), Err(Error::Shape { .. })));
    }

    #[test]
    fn zero_model_ranks_by_id() {
        let mut s = FeatureStore::new(2, "t");
        for id in ["c", "a", "b"] {
            s.insert_raw(id, &[1.0, 0.0]).unwrap();
        }
        let mut m = toy_model();
        m.weights = vec![0.0, 0.0];
        m.bias = 0.0;
        let r = rank_by_classifier(&s, &m).unwrap();
        assert_eq!(r.ids().collect::<Vec<_>>(), ["a", "b", "c"]);
    }

    #[test]
    fn model_json_schema() {
        let m = toy_model();
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        let keys: BTreeSet<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(
            keys,
            BTreeSet::from(["objective", "backend_tag", "dim", "weights", "bias", "C", "train_objective_value"])
        );
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        assert_eq!(LinearModel::load(&path).unwrap(), m);
    }

    #[test]
    fn folds_contain_both_classes() {
        let mut y = vec![-1.0; 40];
        for v in y.iter_mut().take(5) {
            *v = 1.0;
        }
        for seed in 0..20 {
            let (folds, _) = assign_folds(&y, 5, seed).unwrap();
            for f in 0..5 {
                assert!((0..40).any(|i| folds[i] == f && y[i] > 0.0));
                assert!((0..40).any(|i| folds[i] == f && y[i] < 0.0));
            }
        }
        let few = [1.0, 1.0, -1.0, -1.0, -1.0, -1.0];
        assert!(matches!(assign_folds(&few, 5, 0), Err(Error::Stratification(_))));
    }

    #[test]
    fn single_grid_value_is_chosen() {
        let (x, y) = blobs(40, 3, 1.0);
        let mut store = FeatureStore::new(2, "t");
        let mut labels = BTreeMap::new();
        for (i, (xi, yi)) in x.iter().zip(&y).enumerate() {
            let id = format!("p{i:02}");
            store.insert_raw(&id, &[xi[0] as f64, xi[1] as f64]).unwrap();
            labels.insert(id, *yi > 0.0);
        }
        let report = cross_validate_c(&store, &labels, &[0.5], 5, &TrainConfig::default()).unwrap();
        assert_eq!(report.chosen_c, 0.5);
        assert!(cross_validate_c(&store, &labels, &[], 5, &TrainConfig::default()).is_err());
    }
}
