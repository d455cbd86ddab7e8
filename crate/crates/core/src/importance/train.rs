//! Adam on the summed weighted cross-entropy over shuffled problem batches.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encode::{build_schema, encode};
use super::model::{ImportanceModel, ModelMeta};
use super::net::{backward, bce_with_logit, forward, Aggregation, Dims, GraphData, Layout};
use super::ImportanceError;
use crate::strips::Problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Multiplier on the loss of positive (needed) objects.
    pub positive_weight: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            epochs: 1000,
            batch_size: 16,
            positive_weight: 10.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden: usize,
    pub iterations: usize,
    pub aggregation: Aggregation,
    /// Reserve goal channels for negative literals.
    pub negative_goals: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden: 16,
            iterations: 3,
            aggregation: Aggregation::Sum,
            negative_goals: false,
        }
    }
}

/// One training problem with a label for each of its objects.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub problem: &'a Problem,
    pub labels: &'a BTreeMap<String, bool>,
}

struct Adam {
    m: Vec<f32>,
    v: Vec<f32>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn step(&mut self, params: &mut [f32], grads: &[f32], lr: f64) {
        self.t += 1;
        let (b1, b2) = (Self::B1 as f32, Self::B2 as f32);
        let c1 = (1.0 - Self::B1.powi(self.t)) as f32;
        let c2 = (1.0 - Self::B2.powi(self.t)) as f32;
        let (lr, eps) = (lr as f32, Self::EPS as f32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g;
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g * g;
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= lr * mhat / (vhat.sqrt() + eps);
        }
    }
}

fn check(cfg: &TrainConfig, model: &ModelConfig) -> Result<(), ImportanceError> {
    let ok = cfg.learning_rate > 0.0
        && cfg.learning_rate.is_finite()
        && cfg.epochs > 0
        && cfg.batch_size > 0
        && cfg.positive_weight > 0.0
        && model.hidden > 0
        && model.iterations > 0;
    if ok {
        Ok(())
    } else {
        Err(ImportanceError::Config(
            "learning rate, epochs, batch size, weight, hidden size and iterations must be positive".into(),
        ))
    }
}

pub fn train(
    examples: &[Example<'_>],
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<ImportanceModel, ImportanceError> {
    check(cfg, model_cfg)?;
    let first = examples
        .first()
        .ok_or_else(|| ImportanceError::Config("empty training set".into()))?;
    let domain = first.problem.domain();
    if examples.iter().any(|e| e.problem.domain().name != domain.name) {
        return Err(ImportanceError::Config("training problems span several domains".into()));
    }
    let schema = build_schema(domain, model_cfg.negative_goals);
    let mut data = Vec::with_capacity(examples.len());
    for ex in examples {
        let graph = encode(ex.problem, &schema)?;
        let labels = graph
            .objects
            .iter()
            .map(|o| {
                ex.labels.get(o).copied().ok_or_else(|| {
                    ImportanceError::Config(format!("no label for object `{o}` of {}", ex.problem.name))
                })
            })
            .collect::<Result<Vec<bool>, _>>()?;
        data.push((GraphData::<f32>::new(&graph), labels));
    }

    let dims = Dims {
        node_in: schema.node_dim,
        edge_in: schema.edge_dim,
        hidden: model_cfg.hidden,
        iterations: model_cfg.iterations,
        aggregation: model_cfg.aggregation,
    };
    let layout = Layout::new(dims);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params: Vec<f32> = layout.init(&mut rng);
    let mut adam = Adam {
        m: vec![0.0; params.len()],
        v: vec![0.0; params.len()],
        t: 0,
    };
    let mut grads = vec![0f32; params.len()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let weight = cfg.positive_weight as f32;
    let mut epoch_loss = 0.0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.fill(0.0);
            for &i in batch {
                let (g, labels) = &data[i];
                let trace = forward(&params, &layout, g);
                let mut dlogits = Vec::with_capacity(labels.len());
                for (&z, &y) in trace.logits.iter().zip(labels) {
                    let (l, d) = bce_with_logit(z, y, weight);
                    epoch_loss += l as f64;
                    dlogits.push(d);
                }
                backward(&params, &layout, g, &trace, &dlogits, &mut grads);
            }
            if !epoch_loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(ImportanceError::NonFinite { epoch });
            }
            adam.step(&mut params, &grads, cfg.learning_rate);
        }
        log::debug!("epoch {epoch}: loss {epoch_loss:.4}");
    }
    Ok(ImportanceModel {
        schema,
        dims,
        params,
        meta: ModelMeta {
            domain: domain.name.clone(),
            train: cfg.clone(),
            final_loss: epoch_loss,
            examples: examples.len(),
        },
    })
}
