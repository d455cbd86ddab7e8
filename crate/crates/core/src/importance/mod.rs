//! Per-object importance scores from a graph network over the initial state
//! and goal.

mod encode;
mod model;
mod net;
mod train;

use std::collections::BTreeMap;

pub use encode::{build_schema, encode, encode_with, EncodingSchema, FeatureGraph};
pub use model::{ImportanceModel, ModelMeta};
pub use net::{backward, bce_with_logit, forward, sigmoid, Aggregation, Dims, GraphData, Layout, TensorInfo, Trace};
pub use train::{train, Example, ModelConfig, TrainConfig};

use crate::strips::Problem;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ImportanceError {
    #[error("encoding mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}: non-finite loss or gradient")]
    NonFinite { epoch: usize },
    #[error("score {0} lies outside (0, 1)")]
    ScoreOutOfRange(f64),
    #[error("score and label counts differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("model file: {0}")]
    Format(String),
    #[error("{0}")]
    Io(String),
}

/// Scores for every object; objects named in the goal get exactly 1.
pub fn score_objects(model: &ImportanceModel, problem: &Problem) -> Result<BTreeMap<String, f64>, ImportanceError> {
    let mut scores = model.raw_scores(problem)?;
    for o in problem.goal().objects() {
        scores.insert(o.to_string(), 1.0);
    }
    Ok(scores)
}

/// Weighted binary cross-entropy summed over objects:
/// `sum_j -w*y_j*ln(s_j) - (1-y_j)*ln(1-s_j)`.
pub fn loss(scores: &[f64], labels: &[bool], weight: f64) -> Result<f64, ImportanceError> {
    if scores.len() != labels.len() {
        return Err(ImportanceError::LengthMismatch(scores.len(), labels.len()));
    }
    let mut total = 0.0;
    for (&s, &y) in scores.iter().zip(labels) {
        if !(s > 0.0 && s < 1.0) {
            return Err(ImportanceError::ScoreOutOfRange(s));
        }
        total += if y { -weight * s.ln() } else { -(1.0 - s).ln() };
    }
    Ok(total)
}
