//! Confidence scores for nominated relations and patterns, oracle overrides,
//! and fraction-based acceptance and query selection.
//!
//! A relation nominated by distinct patterns with `f_1..f_n` known relations
//! each scores `sum(ln(f_i + 1)) / n`. A pattern that matched `m` distinct
//! known relations among `N` distinct occurrences scores `m ln(m) / N`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::oracle::Answer;

/// Score given to a candidate the user confirmed.
pub const YES_SCORE: f64 = 1000.0;
/// Score given to a candidate the user rejected.
pub const NO_SCORE: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoringError {
    #[error("a relation candidate needs at least one supporting pattern")]
    NoSupport,
    #[error("a pattern that matched no known relation has no score")]
    NoMatches,
    #[error("known matches ({m}) exceed occurrences ({n})")]
    MatchesExceedOccurrences { m: u64, n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

pub fn score_relation(supporting: &[u64]) -> Result<f64, ScoringError> {
    score_relation_in(LogBase::Natural, supporting)
}

pub fn score_relation_in(base: LogBase, supporting: &[u64]) -> Result<f64, ScoringError> {
    if supporting.is_empty() {
        return Err(ScoringError::NoSupport);
    }
    let sum: f64 = supporting.iter().map(|&f| base.log(f as f64 + 1.0)).sum();
    Ok(sum / supporting.len() as f64)
}

pub fn score_pattern(m: u64, n: u64) -> Result<f64, ScoringError> {
    score_pattern_in(LogBase::Natural, m, n)
}

pub fn score_pattern_in(base: LogBase, m: u64, n: u64) -> Result<f64, ScoringError> {
    if m == 0 {
        return Err(ScoringError::NoMatches);
    }
    if m > n {
        return Err(ScoringError::MatchesExceedOccurrences { m, n });
    }
    Ok(m as f64 * base.log(m as f64) / n as f64)
}

pub fn apply_oracle_override(score: f64, answer: Answer) -> f64 {
    match answer {
        Answer::Yes => YES_SCORE,
        Answer::No => NO_SCORE,
        Answer::DontKnow => score,
    }
}

/// A candidate key with its current score.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored<K> {
    pub key: K,
    pub score: f64,
}

impl<K> Scored<K> {
    pub fn new(key: K, score: f64) -> Self {
        Scored { key, score }
    }
}

/// Scores within 1e-9 of each other rank as ties, so the order does not
/// depend on rounding noise (e.g. `ln(4)/2` against `ln(2)`).
fn rank_value(score: f64) -> i64 {
    (score * 1e9).round() as i64
}

fn by_rank<K: Ord>(a: &Scored<K>, b: &Scored<K>) -> Ordering {
    rank_value(b.score).cmp(&rank_value(a.score)).then_with(|| a.key.cmp(&b.key))
}

/// `ceil(fraction * n)`, tolerant of products like `0.07 * 100`.
pub fn ceil_count(fraction: f64, n: usize) -> usize {
    if fraction <= 0.0 || n == 0 {
        return 0;
    }
    let c = (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize;
    c.min(n)
}

/// Candidates sorted best first: higher score, then smaller key.
pub fn ranked<K: Ord + Clone>(candidates: &[Scored<K>]) -> Vec<Scored<K>> {
    let mut v = candidates.to_vec();
    v.sort_by(by_rank);
    v
}

/// The `ceil(fraction * n)` best candidates, never including one with a
/// negative score.
pub fn select_top_fraction<K: Ord + Clone>(candidates: &[Scored<K>], fraction: f64) -> Vec<K> {
    let k = ceil_count(fraction, candidates.len());
    ranked(candidates).into_iter().filter(|c| c.score >= 0.0).take(k).map(|c| c.key).collect()
}

/// The `ceil(fraction * n)` best candidates to put to the user.
pub fn select_queries<K: Ord + Clone>(candidates: &[Scored<K>], fraction: f64) -> Vec<K> {
    let k = ceil_count(fraction, candidates.len());
    ranked(candidates).into_iter().take(k).map(|c| c.key).collect()
}

/// Acceptance with user answers taken into account: scores are overridden,
/// every yes-answered candidate is accepted even past the cut, and no
/// no-answered candidate ever is. Output is in rank order.
pub fn accept_with_answers<K: Ord + Clone>(
    candidates: &[(Scored<K>, Option<Answer>)],
    fraction: f64,
) -> Vec<K> {
    let overridden: Vec<Scored<K>> = candidates
        .iter()
        .map(|(c, a)| Scored::new(c.key.clone(), a.map_or(c.score, |a| apply_oracle_override(c.score, a))))
        .collect();
    let mut accepted = select_top_fraction(&overridden, fraction);
    for (c, a) in candidates {
        if *a == Some(Answer::Yes) && !accepted.contains(&c.key) {
            accepted.push(c.key.clone());
        }
    }
    accepted
}
