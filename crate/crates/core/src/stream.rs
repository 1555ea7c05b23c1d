//! Hard-decision filtering of an incoming image stream.
//!
//! An item is accepted iff its relevance score is at least the calibrated
//! threshold. Decisions depend only on the item and the frozen
//! (scorer, threshold) pair, so streams can be sharded freely and
//! [`Counters`] merged afterwards.

use std::collections::BTreeMap;
use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::data::Objective;
use crate::features::FeatureVector;
use crate::metrics::best_f1;
use crate::retrieval::{kde_similarity, KdeParams, QuerySet};
use crate::svm::{svm_score, LinearModel};
use crate::{Error, Result};

/// The relevance model behind a filter.
#[derive(Debug, Clone)]
pub enum Scorer {
    Classifier(LinearModel),
    Retrieval { queries: QuerySet, params: KdeParams },
}

impl Scorer {
    pub fn objective(&self) -> Objective {
        match self {
            Scorer::Classifier(m) => m.objective,
            Scorer::Retrieval { queries, .. } => queries.objective(),
        }
    }

    pub fn score(&self, x: &FeatureVector) -> Result<f64> {
        match self {
            Scorer::Classifier(m) => svm_score(m, x),
            Scorer::Retrieval { queries, params } => kde_similarity(x, queries, params),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamDecision {
    pub id: String,
    pub score: f64,
    pub accepted: bool,
    pub objective: Objective,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub accepted: u64,
    pub rejected: u64,
    /// Items that could not be scored; not part of the decision count.
    pub failed: u64,
}

impl Counters {
    pub fn decisions(&self) -> u64 {
        self.accepted + self.rejected
    }
}

impl AddAssign for Counters {
    fn add_assign(&mut self, rhs: Self) {
        self.accepted += rhs.accepted;
        self.rejected += rhs.rejected;
        self.failed += rhs.failed;
    }
}

/// A scorer with a threshold fixed for the lifetime of the run.
#[derive(Debug, Clone)]
pub struct FilterState {
    scorer: Scorer,
    threshold: f64,
    counters: Counters,
}

impl FilterState {
    pub fn new(scorer: Scorer, threshold: f64) -> Result<Self> {
        if threshold.is_nan() {
            return Err(Error::Param("threshold is NaN".into()));
        }
        Ok(FilterState {
            scorer,
            threshold,
            counters: Counters::default(),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn scorer(&self) -> &Scorer {
        &self.scorer
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    /// Scores one item; the boundary score is accepted.
    pub fn filter_step(&mut self, id: &str, item: &FeatureVector) -> Result<StreamDecision> {
        let score = match self.scorer.score(item) {
            Ok(s) => s,
            Err(e) => {
                self.counters.failed += 1;
                return Err(e);
            }
        };
        let accepted = score >= self.threshold;
        if accepted {
            self.counters.accepted += 1;
        } else {
            self.counters.rejected += 1;
        }
        Ok(StreamDecision {
            id: id.to_string(),
            score,
            accepted,
            objective: self.scorer.objective(),
        })
    }
}

/// One line of the decision log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StreamEvent {
    Decision(StreamDecision),
    Failure { id: String, error: String },
}

/// Feeds `items` through the filter. Items that fail to load or score are
/// logged and reported as [`StreamEvent::Failure`]; the stream continues.
pub fn run_stream<I>(state: &mut FilterState, items: I, mut sink: impl FnMut(StreamEvent)) -> Counters
where
    I: IntoIterator<Item = (String, Result<FeatureVector>)>,
{
    let before = state.counters();
    for (id, item) in items {
        let outcome = match item {
            Ok(v) => state.filter_step(&id, &v),
            Err(e) => {
                state.counters.failed += 1;
                Err(e)
            }
        };
        match outcome {
            Ok(decision) => sink(StreamEvent::Decision(decision)),
            Err(e) => {
                log::warn!("stream item '{id}' failed: {e}");
                sink(StreamEvent::Failure {
                    id,
                    error: e.to_string(),
                });
            }
        }
    }
    let after = state.counters();
    Counters {
        accepted: after.accepted - before.accepted,
        rejected: after.rejected - before.rejected,
        failed: after.failed - before.failed,
    }
}

/// The F1-optimal threshold on held-out scores.
pub fn calibrate_threshold(
    scores: &BTreeMap<String, f64>,
    labels: &BTreeMap<String, bool>,
) -> Result<f64> {
    Ok(best_f1(scores, labels)?.threshold)
}
