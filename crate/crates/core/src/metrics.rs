//! Ranking evaluation: average precision, mAP, precision-recall curves and
//! the best achievable F1 of a thresholded score.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Scored ids ordered by descending score, ties by ascending id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    items: Vec<(String, f64)>,
}

impl RankedList {
    /// Sorts `scores` into a ranking. Rejects NaN scores and repeated ids.
    pub fn from_scores(scores: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut items: Vec<(String, f64)> = scores.into_iter().collect();
        if let Some((id, _)) = items.iter().find(|(_, s)| s.is_nan()) {
            return Err(Error::Data(format!("NaN score for '{id}'")));
        }
        items.sort_by(|(ia, sa), (ib, sb)| sb.total_cmp(sa).then_with(|| ia.cmp(ib)));
        if let Some(w) = items.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Validation(format!("id '{}' ranked twice", w[0].0)));
        }
        Ok(RankedList { items })
    }

    /// Accepts an already ordered list, checking the ordering invariants.
    pub fn from_ordered(items: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, (id, score)) in items.iter().enumerate() {
            if score.is_nan() {
                return Err(Error::Data(format!("NaN score for '{id}'")));
            }
            if i > 0 && items[i - 1].1 < *score {
                return Err(Error::Validation(format!(
                    "scores increase at position {} ('{id}')",
                    i + 1
                )));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::Validation(format!("id '{id}' ranked twice")));
            }
        }
        Ok(RankedList { items })
    }

    pub fn items(&self) -> &[(String, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|(id, _)| id.as_str())
    }

    /// Relevance indicator per ranking position.
    pub fn relevance(&self, relevant: &BTreeSet<String>) -> Vec<bool> {
        self.items.iter().map(|(id, _)| relevant.contains(id)).collect()
    }
}

/// Uninterpolated AP of a relevance sequence: mean of precision@k over the
/// positions k that hold a relevant item.
pub fn average_precision_of(relevance: &[bool]) -> Result<f64> {
    let total = relevance.iter().filter(|&&r| r).count();
    if total == 0 {
        return Err(Error::UndefinedMetric(
            "average precision needs at least one relevant ranked item".into(),
        ));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, _) in relevance.iter().enumerate().filter(|(_, &r)| r) {
        hits += 1;
        sum += hits as f64 / (k + 1) as f64;
    }
    Ok(sum / total as f64)
}

/// AP of `ranking` with respect to the relevant ids that appear in it.
pub fn average_precision(ranking: &RankedList, relevant: &BTreeSet<String>) -> Result<f64> {
    average_precision_of(&ranking.relevance(relevant))
}

/// AP averaged over all orderings of tied scores.
///
/// Within a block of `g` tied items containing `r` relevant ones, a relevant
/// item lands at block position `j` with probability `r/g` and is then
/// preceded by `(j-1)(r-1)/(g-1)` relevant block members on average.
pub fn average_precision_tie_averaged(
    ranking: &RankedList,
    relevant: &BTreeSet<String>,
) -> Result<f64> {
    let items = ranking.items();
    let total = items.iter().filter(|(id, _)| relevant.contains(id)).count();
    if total == 0 {
        return Err(Error::UndefinedMetric(
            "average precision needs at least one relevant ranked item".into(),
        ));
    }
    let mut sum = 0.0;
    let mut seen_items = 0usize;
    let mut seen_relevant = 0usize;
    let mut start = 0;
    while start < items.len() {
        let score = items[start].1;
        let end = start + items[start..].iter().take_while(|(_, s)| *s == score).count();
        let g = end - start;
        let r = items[start..end]
            .iter()
            .filter(|(id, _)| relevant.contains(id))
            .count();
        if r > 0 {
            let spread = if g > 1 {
                (r - 1) as f64 / (g - 1) as f64
            } else {
                0.0
            };
            for j in 1..=g {
                let expected_hits = seen_relevant as f64 + 1.0 + (j - 1) as f64 * spread;
                sum += (r as f64 / g as f64) * expected_hits / (seen_items + j) as f64;
            }
        }
        seen_items += g;
        seen_relevant += r;
        start = end;
    }
    Ok(sum / total as f64)
}

/// Unweighted mean of per-objective AP values.
pub fn mean_ap<K>(aps: &BTreeMap<K, f64>) -> Result<f64> {
    if aps.is_empty() {
        return Err(Error::UndefinedMetric("mAP of zero objectives".into()));
    }
    Ok(aps.values().sum::<f64>() / aps.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// One (recall, precision) point per ranking position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

impl PrCurve {
    /// Rectangular area: Σ (recall_k − recall_{k−1}) · precision_k.
    pub fn area(&self) -> f64 {
        let mut prev = 0.0;
        let mut area = 0.0;
        for p in &self.points {
            area += (p.recall - prev) * p.precision;
            prev = p.recall;
        }
        area
    }
}

pub fn pr_curve_of(relevance: &[bool]) -> Result<PrCurve> {
    let total = relevance.iter().filter(|&&r| r).count();
    if total == 0 {
        return Err(Error::UndefinedMetric(
            "precision-recall curve needs at least one relevant ranked item".into(),
        ));
    }
    let mut hits = 0usize;
    let points = relevance
        .iter()
        .enumerate()
        .map(|(k, &rel)| {
            hits += usize::from(rel);
            PrPoint {
                recall: hits as f64 / total as f64,
                precision: hits as f64 / (k + 1) as f64,
            }
        })
        .collect();
    Ok(PrCurve { points })
}

pub fn pr_curve(ranking: &RankedList, relevant: &BTreeSet<String>) -> Result<PrCurve> {
    pr_curve_of(&ranking.relevance(relevant))
}

/// Outcome of the best-F1 threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestF1 {
    /// Items with score ≥ threshold are accepted; `+inf` accepts nothing.
    pub threshold: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Sweeps every distinct score as threshold for the rule `score ≥ θ` and
/// returns the F1 maximizer, preferring the larger θ on ties. Ids missing
/// from `labels` count as negatives.
pub fn best_f1(scores: &BTreeMap<String, f64>, labels: &BTreeMap<String, bool>) -> Result<BestF1> {
    let mut scored: Vec<(f64, bool)> = Vec::with_capacity(scores.len());
    for (id, &score) in scores {
        if score.is_nan() {
            return Err(Error::Data(format!("NaN score for '{id}'")));
        }
        scored.push((score, labels.get(id).copied().unwrap_or(false)));
    }
    best_f1_of(&mut scored)
}

pub(crate) fn best_f1_of(scored: &mut [(f64, bool)]) -> Result<BestF1> {
    let positives = scored.iter().filter(|(_, l)| *l).count();
    if positives == 0 {
        return Err(Error::UndefinedMetric("best F1 needs at least one positive".into()));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best = BestF1 {
        threshold: f64::INFINITY,
        f1: 0.0,
        precision: 0.0,
        recall: 0.0,
    };
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < scored.len() {
        let theta = scored[i].0;
        while i < scored.len() && scored[i].0 == theta {
            if scored[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let fn_ = positives - tp;
        let f1 = (2 * tp) as f64 / (2 * tp + fp + fn_) as f64;
        // strict improvement only: keeps the larger threshold on ties
        if f1 > best.f1 {
            best = BestF1 {
                threshold: theta,
                f1,
                precision: tp as f64 / (tp + fp) as f64,
                recall: tp as f64 / positives as f64,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranking(ids: &[(&str, f64)]) -> RankedList {
        RankedList::from_scores(ids.iter().map(|(i, s)| (i.to_string(), *s))).unwrap()
    }

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ranked_list_orders_and_breaks_ties() {
        let r = ranking(&[("b", 1.0), ("a", 1.0), ("c", 2.0)]);
        assert_eq!(r.ids().collect::<Vec<_>>(), ["c", "a", "b"]);
        assert!(RankedList::from_scores(vec![("a".into(), f64::NAN)]).is_err());
        assert!(RankedList::from_scores(vec![("a".into(), 1.0), ("a".into(), 2.0)]).is_err());
        assert!(RankedList::from_ordered(vec![("a".into(), 1.0), ("b".into(), 2.0)]).is_err());
    }

    #[test]
    fn ap_worked_examples() {
        assert_eq!(average_precision_of(&[true, true, false]).unwrap(), 1.0);
        let ap = average_precision_of(&[true, false, true]).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(average_precision_of(&[false, true]).unwrap(), 0.5);
        assert!(matches!(
            average_precision_of(&[false, false]),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn ap_ignores_unranked_relevant_ids() {
        let r = ranking(&[("a", 3.0), ("b", 2.0), ("c", 1.0)]);
        let ap = average_precision(&r, &set(&["a", "c", "zzz"])).unwrap();
        assert!((ap - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn map_matches_published_rows() {
        let harz = BTreeMap::from([(0, 86.4), (1, 71.1), (2, 9.6)]);
        assert!((mean_ap(&harz).unwrap() - 55.7).abs() <= 0.05);
        let eu = BTreeMap::from([(0, 92.1), (1, 77.8), (2, 90.4)]);
        assert!((mean_ap(&eu).unwrap() - 86.8).abs() <= 0.05);
        assert_eq!(mean_ap(&BTreeMap::from([(0, 0.3)])).unwrap(), 0.3);
        assert!(mean_ap(&BTreeMap::<u8, f64>::new()).is_err());
    }

    #[test]
    fn pr_curve_positionwise() {
        let c = pr_curve_of(&[true, false, true]).unwrap();
        let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.recall, p.precision)).collect();
        assert_eq!(pts[0], (0.5, 1.0));
        assert_eq!(pts[1], (0.5, 0.5));
        assert_eq!(pts[2].0, 1.0);
        assert!((pts[2].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((c.area() - 5.0 / 6.0).abs() < 1e-15);

        let perfect = pr_curve_of(&[true, true, true, false]).unwrap();
        assert!(perfect.points[..3].iter().all(|p| p.precision == 1.0));
        assert_eq!(perfect.points[2].recall, 1.0);
    }

    #[test]
    fn best_f1_worked_example() {
        let scores = BTreeMap::from([("a".into(), 0.9), ("b".into(), 0.8), ("c".into(), 0.3)]);
        let labels = BTreeMap::from([("a".into(), true), ("b".into(), false), ("c".into(), true)]);
        let best = best_f1(&scores, &labels).unwrap();
        assert_eq!(best.threshold, 0.3);
        assert!((best.f1 - 0.8).abs() < 1e-15);
        assert!((best.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(best.recall, 1.0);
    }

    #[test]
    fn best_f1_all_positive() {
        let scores = BTreeMap::from([("a".into(), 0.9), ("b".into(), 0.2)]);
        let labels = BTreeMap::from([("a".into(), true), ("b".into(), true)]);
        let best = best_f1(&scores, &labels).unwrap();
        assert_eq!((best.threshold, best.f1), (0.2, 1.0));
    }

    #[test]
    fn best_f1_prefers_larger_threshold_on_ties() {
        // θ=0.9 → P=1,R=1/2,F1=2/3; θ=0.5 → P=2/4,R=1,F1=2/3
        let scores = BTreeMap::from([
            ("a".into(), 0.9),
            ("b".into(), 0.7),
            ("c".into(), 0.6),
            ("d".into(), 0.5),
        ]);
        let labels = BTreeMap::from([("a".into(), true), ("d".into(), true)]);
        let best = best_f1(&scores, &labels).unwrap();
        assert_eq!(best.threshold, 0.9);
    }

    #[test]
    fn best_f1_errors() {
        let scores = BTreeMap::from([("a".into(), 0.9)]);
        assert!(best_f1(&scores, &BTreeMap::new()).is_err());
        let nan = BTreeMap::from([("a".into(), f64::NAN)]);
        assert!(best_f1(&nan, &BTreeMap::from([("a".into(), true)])).is_err());
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn tie_averaged_ap_matches_enumeration() {
        // scores with ties; relevant = {b, c, e}
        let items = [("a", 3.0), ("b", 3.0), ("c", 3.0), ("d", 1.0), ("e", 1.0), ("f", 0.5)];
        let r = ranking(&items);
        let rel = set(&["b", "c", "e"]);
        let groups: Vec<Vec<&str>> = vec![vec!["a", "b", "c"], vec!["d", "e"], vec!["f"]];
        let mut total = 0.0;
        let mut count = 0usize;
        for p0 in permutations(3) {
            for p1 in permutations(2) {
                let order: Vec<bool> = p0
                    .iter()
                    .map(|&i| groups[0][i])
                    .chain(p1.iter().map(|&i| groups[1][i]))
                    .chain(groups[2].iter().copied())
                    .map(|id| rel.contains(id))
                    .collect();
                total += average_precision_of(&order).unwrap();
                count += 1;
            }
        }
        let expected = total / count as f64;
        let got = average_precision_tie_averaged(&r, &rel).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn reversed_perfect_ranking_is_minimal() {
        for n in 1..=8usize {
            for r in 1..=n {
                let perfect: Vec<bool> = (0..n).map(|i| i < r).collect();
                let reversed: Vec<bool> = perfect.iter().rev().copied().collect();
                let min_ap = average_precision_of(&reversed).unwrap();
                for p in permutations(n) {
                    let seq: Vec<bool> = p.iter().map(|&i| perfect[i]).collect();
                    let ap = average_precision_of(&seq).unwrap();
                    assert!(ap >= min_ap - 1e-15);
                    assert!((0.0..=1.0).contains(&ap));
                }
            }
        }
    }
}
