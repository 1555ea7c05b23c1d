//! Text-time baseline: keyword-matching tweets ranked by how close their
//! posting time is to the busiest hour of the event.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, DurationRound, Utc};

use crate::data::{keyword_match, DatasetManifest};
use crate::metrics::RankedList;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TweetItem {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
}

/// Tweet items of a manifest. Records without a timestamp are skipped with
/// a warning; missing text is treated as empty.
pub fn tweet_items(manifest: &DatasetManifest) -> Vec<TweetItem> {
    let mut out = Vec::with_capacity(manifest.len());
    for record in manifest.records() {
        match record.timestamp {
            Some(timestamp) => out.push(TweetItem {
                id: record.id.clone(),
                timestamp,
                text: record.text.clone().unwrap_or_default(),
            }),
            None => log::warn!("'{}' has no timestamp; excluded from the baseline", record.id),
        }
    }
    out
}

fn matching<'a, S: AsRef<str>>(items: &'a [TweetItem], keywords: &[S]) -> Vec<&'a TweetItem> {
    items
        .iter()
        .filter(|item| keyword_match(Some(&item.text), keywords))
        .collect()
}

fn hour_of(t: DateTime<Utc>) -> DateTime<Utc> {
    t.duration_trunc(Duration::hours(1))
        .expect("hour truncation of a valid timestamp")
}

fn peak_of(items: &[&TweetItem]) -> Result<DateTime<Utc>> {
    let mut counts: BTreeMap<DateTime<Utc>, usize> = BTreeMap::new();
    for item in items {
        *counts.entry(hour_of(item.timestamp)).or_default() += 1;
    }
    let mut best: Option<(DateTime<Utc>, usize)> = None;
    // ascending hours, strict comparison: the earliest hour wins ties
    for (hour, count) in counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((hour, count));
        }
    }
    best.map(|(h, _)| h)
        .ok_or_else(|| Error::Validation("no keyword-matching items".into()))
}

/// Start of the UTC hour with the most keyword-matching items.
pub fn peak_hour<S: AsRef<str>>(items: &[TweetItem], keywords: &[S]) -> Result<DateTime<Utc>> {
    peak_of(&matching(items, keywords))
}

/// Keyword-matching items ordered by absolute distance to the middle of the
/// peak hour. Scores are the negated distance in seconds.
pub fn rank_by_text_time<S: AsRef<str>>(items: &[TweetItem], keywords: &[S]) -> Result<RankedList> {
    let hits = matching(items, keywords);
    let anchor = peak_of(&hits)? + Duration::minutes(30);
    RankedList::from_scores(hits.iter().map(|item| {
        let offset = (item.timestamp - anchor).num_milliseconds().unsigned_abs();
        (item.id.clone(), -(offset as f64) / 1000.0)
    }))
}
