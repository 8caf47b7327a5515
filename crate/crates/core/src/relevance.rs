//! Logistic-regression relevance gate over per-document entity-type counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::entity::{entity_type_counts, EntityMention};

pub const NUM_FEATURES: usize = 7;

pub type Features = [f64; NUM_FEATURES];

#[derive(Debug, Error, PartialEq)]
pub enum RelevanceError {
    #[error("training set is empty")]
    Empty,
    #[error("training set has only {0} examples; both classes are required")]
    SingleClass(&'static str),
    #[error("loss became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("invalid {field}: {value}")]
    InvalidParameter { field: &'static str, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceModel {
    pub weights: Features,
    pub bias: f64,
    pub threshold: f64,
}

impl Default for RelevanceModel {
    fn default() -> Self {
        RelevanceModel { weights: [0.0; NUM_FEATURES], bias: 0.0, threshold: 0.5 }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn dot(w: &Features, x: &Features) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl RelevanceModel {
    pub fn validate(&self) -> Result<(), RelevanceError> {
        if let Some(w) = self.weights.iter().chain([&self.bias]).find(|w| !w.is_finite()) {
            return Err(RelevanceError::InvalidParameter { field: "weights", value: *w });
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(RelevanceError::InvalidParameter { field: "threshold", value: self.threshold });
        }
        Ok(())
    }

    /// Probability that a document with these features is relevant.
    pub fn predict(&self, features: &Features) -> f64 {
        sigmoid(self.bias + dot(&self.weights, features))
    }

    pub fn is_relevant(&self, features: &Features) -> bool {
        self.predict(features) >= self.threshold
    }
}

/// Turns a tagged document into the gate's input vector.
pub trait FeatureExtractor {
    fn features(&self, document: &Document, mentions: &[EntityMention]) -> Features;
}

/// Number of mentions of each entity type, in table order.
#[derive(Debug, Clone, Copy, Default)]
pub struct EntityCounts;

impl FeatureExtractor for EntityCounts {
    fn features(&self, _document: &Document, mentions: &[EntityMention]) -> Features {
        counts_to_features(&entity_type_counts(mentions))
    }
}

pub fn counts_to_features(counts: &[usize; NUM_FEATURES]) -> Features {
    counts.map(|c| c as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { l2: 0.01, epochs: 500, learning_rate: 0.1, threshold: 0.5 }
    }
}

/// Mean log loss plus `l2/2 * |w|^2` (bias unregularized), with its gradient
/// in weights and bias.
pub fn loss_and_gradient(
    weights: &Features,
    bias: f64,
    data: &[(Features, bool)],
    l2: f64,
) -> (f64, Features, f64) {
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut gw = [0.0; NUM_FEATURES];
    let mut gb = 0.0;
    for (x, y) in data {
        let z = bias + dot(weights, x);
        let y = if *y { 1.0 } else { 0.0 };
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += r * xi;
        }
        gb += r;
    }
    loss /= n;
    gb /= n;
    let mut reg = 0.0;
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
        reg += w * w;
    }
    (loss + 0.5 * l2 * reg, gw, gb)
}

/// Full-batch gradient descent from zero; returns the model and the loss
/// before each update plus the final loss.
pub fn train_with_history(
    labeled: &[(Features, bool)],
    config: &TrainConfig,
) -> Result<(RelevanceModel, Vec<f64>), RelevanceError> {
    if labeled.is_empty() {
        return Err(RelevanceError::Empty);
    }
    if labeled.iter().all(|(_, y)| *y) {
        return Err(RelevanceError::SingleClass("positive"));
    }
    if labeled.iter().all(|(_, y)| !*y) {
        return Err(RelevanceError::SingleClass("negative"));
    }
    if !(config.l2 >= 0.0 && config.l2.is_finite()) {
        return Err(RelevanceError::InvalidParameter { field: "l2", value: config.l2 });
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(RelevanceError::InvalidParameter { field: "learning_rate", value: config.learning_rate });
    }
    if config.epochs == 0 {
        return Err(RelevanceError::InvalidParameter { field: "epochs", value: 0.0 });
    }
    let mut model = RelevanceModel { threshold: config.threshold, ..RelevanceModel::default() };
    model.validate()?;

    let mut history = Vec::with_capacity(config.epochs + 1);
    for iteration in 0..=config.epochs {
        let (loss, gw, gb) = loss_and_gradient(&model.weights, model.bias, labeled, config.l2);
        if !loss.is_finite() {
            return Err(RelevanceError::NonFinite { iteration });
        }
        history.push(loss);
        if iteration == config.epochs {
            break;
        }
        for (w, g) in model.weights.iter_mut().zip(gw) {
            *w -= config.learning_rate * g;
        }
        model.bias -= config.learning_rate * gb;
    }
    model.validate()?;
    Ok((model, history))
}

pub fn train(labeled: &[(Features, bool)], config: &TrainConfig) -> Result<RelevanceModel, RelevanceError> {
    train_with_history(labeled, config).map(|(m, _)| m)
}

/// Splits documents into (kept, dropped), preserving order. A document with
/// no entry in `mentions_by_doc` is scored with zero counts.
pub fn filter_corpus(
    model: &RelevanceModel,
    documents: Vec<Document>,
    mentions_by_doc: &BTreeMap<String, Vec<EntityMention>>,
) -> (Vec<Document>, Vec<Document>) {
    filter_corpus_with(model, &EntityCounts, documents, mentions_by_doc)
}

pub fn filter_corpus_with(
    model: &RelevanceModel,
    extractor: &dyn FeatureExtractor,
    documents: Vec<Document>,
    mentions_by_doc: &BTreeMap<String, Vec<EntityMention>>,
) -> (Vec<Document>, Vec<Document>) {
    documents.into_iter().partition(|d| {
        let mentions = mentions_by_doc.get(&d.id).map(Vec::as_slice).unwrap_or(&[]);
        model.is_relevant(&extractor.features(d, mentions))
    })
}
