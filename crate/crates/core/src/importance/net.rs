//! The graph network: an edge MLP and a node MLP applied for `K` rounds,
//! followed by a logistic output head, with hand-written backpropagation.
//!
//! Each MLP is `Linear -> LayerNorm -> ReLU -> Linear`. Node states start at
//! zero. Round `k` computes, for an edge `s -> d` with features `e`,
//! `m = edge([e, x_s, h_s, x_d, h_d])`, aggregates the messages entering each
//! node, and sets `h_v = node([x_v, h_v, agg_v])`. The score of `v` is
//! `sigmoid(w . h_v + b)` after the last round.
//!
//! Parameters live in one flat vector; [`Layout`] names its slices.

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encode::FeatureGraph;

const LN_EPS: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Sum,
    Mean,
}

impl std::str::FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(Aggregation::Sum),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(format!("unknown aggregation `{s}` (expected sum or mean)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub node_in: usize,
    pub edge_in: usize,
    pub hidden: usize,
    pub iterations: usize,
    pub aggregation: Aggregation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Mlp {
    input: usize,
    hidden: usize,
    out: usize,
    w1: usize,
    b1: usize,
    gamma: usize,
    beta: usize,
    w2: usize,
    b2: usize,
    end: usize,
}

impl Mlp {
    fn at(offset: usize, input: usize, hidden: usize, out: usize) -> Self {
        let w1 = offset;
        let b1 = w1 + hidden * input;
        let gamma = b1 + hidden;
        let beta = gamma + hidden;
        let w2 = beta + hidden;
        let b2 = w2 + out * hidden;
        Mlp {
            input,
            hidden,
            out,
            w1,
            b1,
            gamma,
            beta,
            w2,
            b2,
            end: b2 + out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorInfo {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl TensorInfo {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Offsets of every tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    dims: Dims,
    edge: Mlp,
    node: Mlp,
    head_w: usize,
    head_b: usize,
    total: usize,
}

impl Layout {
    pub fn new(dims: Dims) -> Self {
        let h = dims.hidden;
        let edge = Mlp::at(0, dims.edge_in + 2 * (dims.node_in + h), h, h);
        let node = Mlp::at(edge.end, dims.node_in + 2 * h, h, h);
        let head_w = node.end;
        let head_b = head_w + h;
        Layout {
            dims,
            edge,
            node,
            head_w,
            head_b,
            total: head_b + 1,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn num_params(&self) -> usize {
        self.total
    }

    pub fn tensors(&self) -> Vec<TensorInfo> {
        let t = |name: &str, offset, rows, cols| TensorInfo {
            name: name.to_string(),
            offset,
            rows,
            cols,
        };
        let mut out = Vec::new();
        for (prefix, m) in [("edge", &self.edge), ("node", &self.node)] {
            out.push(t(&format!("{prefix}.w1"), m.w1, m.hidden, m.input));
            out.push(t(&format!("{prefix}.b1"), m.b1, 1, m.hidden));
            out.push(t(&format!("{prefix}.ln_gamma"), m.gamma, 1, m.hidden));
            out.push(t(&format!("{prefix}.ln_beta"), m.beta, 1, m.hidden));
            out.push(t(&format!("{prefix}.w2"), m.w2, m.out, m.hidden));
            out.push(t(&format!("{prefix}.b2"), m.b2, 1, m.out));
        }
        out.push(t("head.w", self.head_w, 1, self.dims.hidden));
        out.push(t("head.b", self.head_b, 1, 1));
        out
    }

    /// Weights uniform in `+-1/sqrt(fan_in)`, biases and shifts zero, scales one.
    pub fn init<T: Float, R: Rng>(&self, rng: &mut R) -> Vec<T> {
        let mut p = vec![T::zero(); self.total];
        for t in self.tensors() {
            let name = t.name.as_str();
            if name.ends_with("ln_gamma") {
                p[t.range()].fill(T::one());
            } else if name.ends_with(".w1") || name.ends_with(".w2") || name == "head.w" {
                let bound = 1.0 / (t.cols as f64).sqrt();
                for v in &mut p[t.range()] {
                    *v = T::from(rng.random_range(-bound..=bound)).unwrap();
                }
            }
        }
        p
    }
}

/// A feature graph converted to the working float type, with incoming-edge
/// lists per node.
#[derive(Debug, Clone)]
pub struct GraphData<T> {
    pub n: usize,
    x: Vec<T>,
    e: Vec<T>,
    edges: Vec<(u32, u32)>,
    in_ptr: Vec<usize>,
    in_idx: Vec<u32>,
}

impl<T: Float> GraphData<T> {
    pub fn new(g: &FeatureGraph) -> Self {
        let n = g.num_nodes();
        let mut in_ptr = vec![0usize; n + 1];
        for &(_, d) in &g.edges {
            in_ptr[d as usize + 1] += 1;
        }
        for i in 0..n {
            in_ptr[i + 1] += in_ptr[i];
        }
        let mut fill = in_ptr.clone();
        let mut in_idx = vec![0u32; g.edges.len()];
        for (i, &(_, d)) in g.edges.iter().enumerate() {
            in_idx[fill[d as usize]] = i as u32;
            fill[d as usize] += 1;
        }
        let conv = |v: &[f32]| v.iter().map(|&f| T::from(f).unwrap()).collect();
        GraphData {
            n,
            x: conv(&g.nodes),
            e: conv(&g.edge_features),
            edges: g.edges.clone(),
            in_ptr,
            in_idx,
        }
    }

    fn incoming(&self, v: usize) -> &[u32] {
        &self.in_idx[self.in_ptr[v]..self.in_ptr[v + 1]]
    }
}

/// Intermediate values of one MLP over a batch of inputs.
#[derive(Debug, Clone)]
struct MlpCache<T> {
    xhat: Vec<T>,
    inv_std: Vec<T>,
    y: Vec<T>,
}

impl<T: Float> MlpCache<T> {
    fn new(rows: usize, hidden: usize) -> Self {
        MlpCache {
            xhat: vec![T::zero(); rows * hidden],
            inv_std: vec![T::zero(); rows],
            y: vec![T::zero(); rows * hidden],
        }
    }
}

fn mlp_forward<T: Float>(p: &[T], m: &Mlp, x: &[T], cache: &mut MlpCache<T>, row: usize, out: &mut [T]) {
    let h = m.hidden;
    let xhat = &mut cache.xhat[row * h..(row + 1) * h];
    for (i, z) in xhat.iter_mut().enumerate() {
        let w = &p[m.w1 + i * m.input..m.w1 + (i + 1) * m.input];
        *z = w.iter().zip(x).fold(p[m.b1 + i], |acc, (&a, &b)| acc + a * b);
    }
    let hf = T::from(h).unwrap();
    let mu = xhat.iter().fold(T::zero(), |a, &b| a + b) / hf;
    let var = xhat.iter().fold(T::zero(), |a, &b| a + (b - mu) * (b - mu)) / hf;
    let inv = T::one() / (var + T::from(LN_EPS).unwrap()).sqrt();
    cache.inv_std[row] = inv;
    let y = &mut cache.y[row * h..(row + 1) * h];
    for i in 0..h {
        xhat[i] = (xhat[i] - mu) * inv;
        y[i] = p[m.gamma + i] * xhat[i] + p[m.beta + i];
    }
    for (o, v) in out.iter_mut().enumerate() {
        let w = &p[m.w2 + o * h..m.w2 + (o + 1) * h];
        *v = w
            .iter()
            .zip(y.iter())
            .fold(p[m.b2 + o], |acc, (&a, &b)| acc + a * b.max(T::zero()));
    }
}

/// Accumulates parameter gradients into `g` and input gradients into `dx`.
#[allow(clippy::too_many_arguments)]
fn mlp_backward<T: Float>(
    p: &[T],
    g: &mut [T],
    m: &Mlp,
    x: &[T],
    cache: &MlpCache<T>,
    row: usize,
    dout: &[T],
    dx: &mut [T],
    scratch: &mut Vec<T>,
) {
    let h = m.hidden;
    let xhat = &cache.xhat[row * h..(row + 1) * h];
    let y = &cache.y[row * h..(row + 1) * h];
    let inv = cache.inv_std[row];
    scratch.clear();
    scratch.resize(h, T::zero());
    let dy = scratch;
    for (o, &d) in dout.iter().enumerate() {
        g[m.b2 + o] = g[m.b2 + o] + d;
        for i in 0..h {
            let a = y[i].max(T::zero());
            g[m.w2 + o * h + i] = g[m.w2 + o * h + i] + d * a;
            dy[i] = dy[i] + p[m.w2 + o * h + i] * d;
        }
    }
    let hf = T::from(h).unwrap();
    let mut mean_d = T::zero();
    let mut mean_dx = T::zero();
    for i in 0..h {
        if y[i] <= T::zero() {
            dy[i] = T::zero();
        }
        g[m.gamma + i] = g[m.gamma + i] + dy[i] * xhat[i];
        g[m.beta + i] = g[m.beta + i] + dy[i];
        // dy now holds the gradient with respect to xhat
        dy[i] = dy[i] * p[m.gamma + i];
        mean_d = mean_d + dy[i];
        mean_dx = mean_dx + dy[i] * xhat[i];
    }
    mean_d = mean_d / hf;
    mean_dx = mean_dx / hf;
    for i in 0..h {
        let dz = inv * (dy[i] - mean_d - xhat[i] * mean_dx);
        g[m.b1 + i] = g[m.b1 + i] + dz;
        let row_w = m.w1 + i * m.input;
        for (c, &xc) in x.iter().enumerate() {
            g[row_w + c] = g[row_w + c] + dz * xc;
            dx[c] = dx[c] + p[row_w + c] * dz;
        }
    }
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    /// `K + 1` node-state matrices, `n x hidden` each; index 0 is all zeros.
    states: Vec<Vec<T>>,
    aggs: Vec<Vec<T>>,
    edge_caches: Vec<MlpCache<T>>,
    node_caches: Vec<MlpCache<T>>,
    pub logits: Vec<T>,
}

impl<T: Float> Trace<T> {
    pub fn scores(&self) -> Vec<T> {
        self.logits.iter().map(|&z| sigmoid(z)).collect()
    }
}

pub fn sigmoid<T: Float>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

fn edge_input<T: Float>(g: &GraphData<T>, dims: &Dims, h_prev: &[T], e: usize, buf: &mut Vec<T>) {
    let (s, d) = g.edges[e];
    let (dn, de, h) = (dims.node_in, dims.edge_in, dims.hidden);
    buf.clear();
    buf.extend_from_slice(&g.e[e * de..(e + 1) * de]);
    for v in [s as usize, d as usize] {
        buf.extend_from_slice(&g.x[v * dn..(v + 1) * dn]);
        buf.extend_from_slice(&h_prev[v * h..(v + 1) * h]);
    }
}

fn node_input<T: Float>(g: &GraphData<T>, dims: &Dims, h_prev: &[T], agg: &[T], v: usize, buf: &mut Vec<T>) {
    let (dn, h) = (dims.node_in, dims.hidden);
    buf.clear();
    buf.extend_from_slice(&g.x[v * dn..(v + 1) * dn]);
    buf.extend_from_slice(&h_prev[v * h..(v + 1) * h]);
    buf.extend_from_slice(&agg[v * h..(v + 1) * h]);
}

pub fn forward<T: Float>(p: &[T], layout: &Layout, g: &GraphData<T>) -> Trace<T> {
    let dims = &layout.dims;
    let h = dims.hidden;
    let ne = g.edges.len();
    let mut states = vec![vec![T::zero(); g.n * h]];
    let mut aggs = Vec::new();
    let mut edge_caches = Vec::new();
    let mut node_caches = Vec::new();
    let mut buf = Vec::new();
    let mut messages = vec![T::zero(); ne * h];
    let mut column = Vec::new();
    for _ in 0..dims.iterations {
        let h_prev = states.last().unwrap();
        let mut ec = MlpCache::new(ne, h);
        for e in 0..ne {
            edge_input(g, dims, h_prev, e, &mut buf);
            mlp_forward(p, &layout.edge, &buf, &mut ec, e, &mut messages[e * h..(e + 1) * h]);
        }
        // Summing in sorted order makes the aggregate independent of edge order.
        let mut agg = vec![T::zero(); g.n * h];
        for v in 0..g.n {
            let incoming = g.incoming(v);
            if incoming.is_empty() {
                continue;
            }
            for j in 0..h {
                column.clear();
                column.extend(incoming.iter().map(|&e| messages[e as usize * h + j]));
                column.sort_by(|a: &T, b: &T| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                let mut s = column.iter().fold(T::zero(), |a, &b| a + b);
                if dims.aggregation == Aggregation::Mean {
                    s = s / T::from(incoming.len()).unwrap();
                }
                agg[v * h + j] = s;
            }
        }
        let mut nc = MlpCache::new(g.n, h);
        let mut next = vec![T::zero(); g.n * h];
        for v in 0..g.n {
            node_input(g, dims, h_prev, &agg, v, &mut buf);
            mlp_forward(p, &layout.node, &buf, &mut nc, v, &mut next[v * h..(v + 1) * h]);
        }
        aggs.push(agg);
        edge_caches.push(ec);
        node_caches.push(nc);
        states.push(next);
    }
    let last = states.last().unwrap();
    let logits = (0..g.n)
        .map(|v| {
            (0..h).fold(p[layout.head_b], |acc, j| {
                acc + p[layout.head_w + j] * last[v * h + j]
            })
        })
        .collect();
    Trace {
        states,
        aggs,
        edge_caches,
        node_caches,
        logits,
    }
}

/// Adds the gradient of `sum_v dlogits[v] * logit_v` with respect to the
/// parameters into `grads`.
pub fn backward<T: Float>(
    p: &[T],
    layout: &Layout,
    g: &GraphData<T>,
    trace: &Trace<T>,
    dlogits: &[T],
    grads: &mut [T],
) {
    let dims = &layout.dims;
    let h = dims.hidden;
    let k = dims.iterations;
    let mut dh = vec![T::zero(); g.n * h];
    let last = &trace.states[k];
    for v in 0..g.n {
        let d = dlogits[v];
        grads[layout.head_b] = grads[layout.head_b] + d;
        for j in 0..h {
            grads[layout.head_w + j] = grads[layout.head_w + j] + d * last[v * h + j];
            dh[v * h + j] = d * p[layout.head_w + j];
        }
    }
    let mut buf = Vec::new();
    let mut din = Vec::new();
    let mut scratch = Vec::new();
    let (dn, de) = (dims.node_in, dims.edge_in);
    for it in (0..k).rev() {
        let h_prev = &trace.states[it];
        let agg = &trace.aggs[it];
        let mut dh_prev = vec![T::zero(); g.n * h];
        let mut dagg = vec![T::zero(); g.n * h];
        for v in 0..g.n {
            node_input(g, dims, h_prev, agg, v, &mut buf);
            din.clear();
            din.resize(buf.len(), T::zero());
            mlp_backward(
                p,
                grads,
                &layout.node,
                &buf,
                &trace.node_caches[it],
                v,
                &dh[v * h..(v + 1) * h],
                &mut din,
                &mut scratch,
            );
            for j in 0..h {
                dh_prev[v * h + j] = dh_prev[v * h + j] + din[dn + j];
                dagg[v * h + j] = din[dn + h + j];
            }
        }
        let mut dm = vec![T::zero(); h];
        for e in 0..g.edges.len() {
            let (s, d) = g.edges[e];
            let (s, d) = (s as usize, d as usize);
            let scale = match dims.aggregation {
                Aggregation::Sum => T::one(),
                Aggregation::Mean => T::one() / T::from(g.incoming(d).len()).unwrap(),
            };
            for j in 0..h {
                dm[j] = dagg[d * h + j] * scale;
            }
            edge_input(g, dims, h_prev, e, &mut buf);
            din.clear();
            din.resize(buf.len(), T::zero());
            mlp_backward(
                p,
                grads,
                &layout.edge,
                &buf,
                &trace.edge_caches[it],
                e,
                &dm,
                &mut din,
                &mut scratch,
            );
            let src_h = de + dn;
            let dst_h = de + 2 * dn + h;
            for j in 0..h {
                dh_prev[s * h + j] = dh_prev[s * h + j] + din[src_h + j];
                dh_prev[d * h + j] = dh_prev[d * h + j] + din[dst_h + j];
            }
        }
        dh = dh_prev;
    }
}

/// Weighted binary cross-entropy on a logit and its derivative.
/// A positive label costs `weight * -log(s)`, a negative one `-log(1 - s)`.
pub fn bce_with_logit<T: Float>(z: T, positive: bool, weight: T) -> (T, T) {
    let softplus = |x: T| x.max(T::zero()) + (T::one() + (-x.abs()).exp()).ln();
    let s = sigmoid(z);
    if positive {
        (weight * softplus(-z), weight * (s - T::one()))
    } else {
        (softplus(z), s)
    }
}
