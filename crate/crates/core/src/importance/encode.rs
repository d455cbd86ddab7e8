//! Graph encoding of an initial state and goal.
//!
//! Node channels, for `U` unary properties:
//! `[init (U) | positive goal (U) | negative goal (U, optional)]`.
//! Edge channels of the ordered pair `(a, b)`, for `B` binary properties,
//! each block holding `[p(a,b), p(b,a)]` per property in order:
//! `[init (2B) | positive goal (2B) | negative goal (2B, optional)]`.
//! A self-referencing atom `p(a,a)` sets only the forward channel of `(a, a)`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ImportanceError;
use crate::strips::{Atom, DomainModel, Problem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingSchema {
    pub unary: Vec<String>,
    pub binary: Vec<String>,
    pub negative_goals: bool,
    pub node_dim: usize,
    pub edge_dim: usize,
}

/// Properties sorted by name, split by arity.
pub fn build_schema(domain: &DomainModel, allow_negative_goals: bool) -> EncodingSchema {
    let mut unary = Vec::new();
    let mut binary = Vec::new();
    for p in domain.properties() {
        match p.arity() {
            1 => unary.push(p.name),
            _ => binary.push(p.name),
        }
    }
    unary.sort();
    binary.sort();
    let blocks = 1 + if allow_negative_goals { 2 } else { 1 };
    EncodingSchema {
        node_dim: blocks * unary.len(),
        edge_dim: blocks * 2 * binary.len(),
        unary,
        binary,
        negative_goals: allow_negative_goals,
    }
}

/// Input graph for the network. Nodes follow lexicographic object order;
/// edges are sorted by `(source, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGraph {
    pub objects: Vec<String>,
    pub node_dim: usize,
    pub edge_dim: usize,
    /// Row-major `objects.len() x node_dim`.
    pub nodes: Vec<f32>,
    pub edges: Vec<(u32, u32)>,
    /// Row-major `edges.len() x edge_dim`.
    pub edge_features: Vec<f32>,
}

impl FeatureGraph {
    pub fn num_nodes(&self) -> usize {
        self.objects.len()
    }

    pub fn node(&self, i: usize) -> &[f32] {
        &self.nodes[i * self.node_dim..(i + 1) * self.node_dim]
    }

    pub fn edge(&self, i: usize) -> &[f32] {
        &self.edge_features[i * self.edge_dim..(i + 1) * self.edge_dim]
    }
}

pub fn encode(problem: &Problem, schema: &EncodingSchema) -> Result<FeatureGraph, ImportanceError> {
    encode_with(problem, schema, true)
}

/// `sparsify = false` keeps every ordered pair of distinct objects.
pub fn encode_with(
    problem: &Problem,
    schema: &EncodingSchema,
    sparsify: bool,
) -> Result<FeatureGraph, ImportanceError> {
    let objects: Vec<String> = problem.object_names().map(String::from).collect();
    let index: HashMap<&str, u32> = objects
        .iter()
        .enumerate()
        .map(|(i, o)| (o.as_str(), i as u32))
        .collect();
    let unary: HashMap<&str, usize> = schema
        .unary
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let binary: HashMap<&str, usize> = schema
        .binary
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let (nu, nb) = (schema.unary.len(), schema.binary.len());
    let n = objects.len();
    let mut nodes = vec![0f32; n * schema.node_dim];
    let mut edges: BTreeMap<(u32, u32), Vec<f32>> = BTreeMap::new();
    if !sparsify {
        for a in 0..n as u32 {
            for b in 0..n as u32 {
                if a != b {
                    edges.insert((a, b), vec![0f32; schema.edge_dim]);
                }
            }
        }
    }

    let mut set = |atom: &Atom, block: usize| -> Result<(), ImportanceError> {
        let mismatch = || ImportanceError::SchemaMismatch(format!("property `{}` is not in the encoding", atom.predicate));
        match atom.args.as_slice() {
            [o] => {
                let p = *unary.get(atom.predicate.as_str()).ok_or_else(mismatch)?;
                nodes[index[o.as_str()] as usize * schema.node_dim + block * nu + p] = 1.0;
            }
            [a, b] => {
                let p = *binary.get(atom.predicate.as_str()).ok_or_else(mismatch)?;
                let (ia, ib) = (index[a.as_str()], index[b.as_str()]);
                let base = block * 2 * nb + 2 * p;
                edges
                    .entry((ia, ib))
                    .or_insert_with(|| vec![0f32; schema.edge_dim])[base] = 1.0;
                if ia != ib {
                    edges
                        .entry((ib, ia))
                        .or_insert_with(|| vec![0f32; schema.edge_dim])[base + 1] = 1.0;
                }
            }
            _ => return Err(mismatch()),
        }
        Ok(())
    };
    for atom in problem.init().iter() {
        set(atom, 0)?;
    }
    for lit in problem.goal().literals() {
        if !lit.positive && !schema.negative_goals {
            return Err(ImportanceError::SchemaMismatch(format!(
                "negative goal literal {lit} but the encoding has no negative-goal channels"
            )));
        }
        set(&lit.atom, if lit.positive { 1 } else { 2 })?;
    }

    let mut edge_list = Vec::with_capacity(edges.len());
    let mut edge_features = Vec::with_capacity(edges.len() * schema.edge_dim);
    for (k, v) in edges {
        edge_list.push(k);
        edge_features.extend(v);
    }
    Ok(FeatureGraph {
        objects,
        node_dim: schema.node_dim,
        edge_dim: schema.edge_dim,
        nodes,
        edges: edge_list,
        edge_features,
    })
}
