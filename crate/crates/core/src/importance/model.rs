//! A trained scorer together with its encoding, and its JSON file format.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::encode::{build_schema, encode, EncodingSchema};
use super::net::{forward, Dims, GraphData, Layout};
use super::train::TrainConfig;
use super::ImportanceError;
use crate::strips::{DomainModel, Problem};

pub const FORMAT: &str = "ploi-importance-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub domain: String,
    pub train: TrainConfig,
    pub final_loss: f64,
    pub examples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceModel {
    pub schema: EncodingSchema,
    pub dims: Dims,
    pub params: Vec<f32>,
    pub meta: ModelMeta,
}

#[derive(Serialize, Deserialize)]
struct Tensor {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    schema: EncodingSchema,
    dims: Dims,
    meta: ModelMeta,
    tensors: Vec<Tensor>,
}

/// Scores are kept strictly inside (0, 1) even where f32/f64 rounding would
/// saturate the logistic function.
fn squash(logit: f32) -> f64 {
    let z = logit as f64;
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

impl ImportanceModel {
    pub fn layout(&self) -> Layout {
        Layout::new(self.dims)
    }

    /// Errors unless `domain` yields exactly this model's encoding.
    pub fn check_domain(&self, domain: &DomainModel) -> Result<(), ImportanceError> {
        let expected = build_schema(domain, self.schema.negative_goals);
        if expected != self.schema {
            return Err(ImportanceError::SchemaMismatch(format!(
                "model was trained for domain `{}` with properties {:?} / {:?}, domain `{}` has {:?} / {:?}",
                self.meta.domain,
                self.schema.unary,
                self.schema.binary,
                domain.name,
                expected.unary,
                expected.binary
            )));
        }
        Ok(())
    }

    /// Network outputs per object, without the goal override.
    pub fn raw_scores(&self, problem: &Problem) -> Result<BTreeMap<String, f64>, ImportanceError> {
        let graph = encode(problem, &self.schema)?;
        let data = GraphData::<f32>::new(&graph);
        let trace = forward(&self.params, &self.layout(), &data);
        Ok(graph
            .objects
            .into_iter()
            .zip(trace.logits)
            .map(|(o, z)| (o, squash(z)))
            .collect())
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            schema: self.schema.clone(),
            dims: self.dims,
            meta: self.meta.clone(),
            tensors: self
                .layout()
                .tensors()
                .into_iter()
                .map(|t| Tensor {
                    data: self.params[t.range()].to_vec(),
                    name: t.name,
                    rows: t.rows,
                    cols: t.cols,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, ImportanceError> {
        let bad = |m: String| ImportanceError::Format(m);
        let file: ModelFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(bad(format!(
                "expected {FORMAT} version {VERSION}, found {} version {}",
                file.format, file.version
            )));
        }
        if file.dims.node_in != file.schema.node_dim || file.dims.edge_in != file.schema.edge_dim {
            return Err(bad("network input sizes disagree with the encoding".into()));
        }
        let layout = Layout::new(file.dims);
        let expected = layout.tensors();
        if expected.len() != file.tensors.len() {
            return Err(bad(format!("expected {} tensors, found {}", expected.len(), file.tensors.len())));
        }
        let mut params = vec![0f32; layout.num_params()];
        for (want, got) in expected.iter().zip(&file.tensors) {
            if want.name != got.name || want.rows != got.rows || want.cols != got.cols || got.data.len() != want.len() {
                return Err(bad(format!(
                    "tensor `{}` ({}x{}) does not match expected `{}` ({}x{})",
                    got.name, got.rows, got.cols, want.name, want.rows, want.cols
                )));
            }
            if got.data.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("tensor `{}` holds a non-finite value", got.name)));
            }
            params[want.range()].copy_from_slice(&got.data);
        }
        Ok(ImportanceModel {
            schema: file.schema,
            dims: file.dims,
            params,
            meta: file.meta,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ImportanceError> {
        std::fs::write(path, self.to_json()).map_err(|e| ImportanceError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, ImportanceError> {
        let text = std::fs::read_to_string(path).map_err(|e| ImportanceError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Loads a model and checks it against the domain it will score.
    pub fn load_for(path: &Path, domain: &DomainModel) -> Result<Self, ImportanceError> {
        let model = Self::load(path)?;
        model.check_domain(domain)?;
        Ok(model)
    }
}
