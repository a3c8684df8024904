// SPDX-License-Identifier: Apache-2.0

//! Direction-aware message-passing network.
//!
//! Layer update: `h' = ReLU(W [h ; mean_in(h) ; mean_out(h)] + b)`, with the
//! mean over an empty neighbourhood equal to zero. The node head is an affine
//! map to one logit per node; the graph head is an affine map of
//! `[mean_pool(h) ; sum_pool(h)]` to four outputs.

use std::rc::Rc;

use ndarray::{s, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::autodiff::{Sparse, Tape, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnnConfig {
    pub layers: usize,
    pub hidden: usize,
    /// Learning rate of the first epoch.
    pub learning_rate: f64,
    /// Learning rate of the last epoch; cosine annealing in between.
    pub final_learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self {
            layers: 5,
            hidden: 300,
            learning_rate: 1e-3,
            final_learning_rate: 1e-4,
            batch_size: 5,
            epochs: 100,
            dropout: 0.0,
            seed: 0,
        }
    }
}

impl GnnConfig {
    /// Smaller network and schedule for minutes-scale runs.
    pub fn desk() -> Self {
        Self { layers: 3, hidden: 64, epochs: 30, ..Self::default() }
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 {
            return self.learning_rate;
        }
        let t = epoch as f64 / (self.epochs - 1) as f64;
        let cos = 0.5 * (1.0 + (std::f64::consts::PI * t).cos());
        self.final_learning_rate + (self.learning_rate - self.final_learning_rate) * cos
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden == 0 || self.batch_size == 0 {
            return Err(Error::Model("layers, hidden and batch_size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Model(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.learning_rate > 0.0 && self.final_learning_rate > 0.0) {
            return Err(Error::Model("learning rates must be positive".into()));
        }
        Ok(())
    }
}

/// Dense matrix stored as shape plus row-major data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixRepr", try_from = "MatrixRepr")]
pub struct Matrix(pub Array2<f64>);

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    shape: [usize; 2],
    data: Vec<f64>,
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        let shape = [m.0.nrows(), m.0.ncols()];
        Self { shape, data: m.0.iter().copied().collect() }
    }
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = String;

    fn try_from(r: MatrixRepr) -> std::result::Result<Self, String> {
        Array2::from_shape_vec((r.shape[0], r.shape[1]), r.data)
            .map(Matrix)
            .map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub w: Matrix,
    pub b: Matrix,
}

impl Dense {
    /// Uniform Glorot initialization, zero bias.
    fn init(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w = Array2::from_shape_fn((fan_in, fan_out), |_| rng.gen_range(-limit..limit));
        Self { w: Matrix(w), b: Matrix(Array2::zeros((1, fan_out))) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    /// One logit per node.
    Node,
    /// Four outputs per graph.
    Graph,
}

pub const GRAPH_OUTPUTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnnParams {
    pub input_dim: usize,
    pub head_kind: HeadKind,
    pub layers: Vec<Dense>,
    pub head: Dense,
}

impl GnnParams {
    pub fn init(input_dim: usize, head_kind: HeadKind, cfg: &GnnConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::with_capacity(cfg.layers);
        let mut d = input_dim;
        for _ in 0..cfg.layers {
            layers.push(Dense::init(&mut rng, 3 * d, cfg.hidden));
            d = cfg.hidden;
        }
        let head = match head_kind {
            HeadKind::Node => Dense::init(&mut rng, d, 1),
            HeadKind::Graph => Dense::init(&mut rng, 2 * d, GRAPH_OUTPUTS),
        };
        Self { input_dim, head_kind, layers, head }
    }

    /// All parameter matrices in a fixed order (per layer `w`, `b`; then head).
    pub fn tensors(&self) -> Vec<&Array2<f64>> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.push(&l.w.0);
            out.push(&l.b.0);
        }
        out.push(&self.head.w.0);
        out.push(&self.head.b.0);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<f64>> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            out.push(&mut l.w.0);
            out.push(&mut l.b.0);
        }
        out.push(&mut self.head.w.0);
        out.push(&mut self.head.b.0);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn zeroed(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.fill(0.0);
        }
        z
    }
}

/// Aggregation and pooling operators for a batch of graphs stacked as one
/// disjoint union.
#[derive(Clone, Debug)]
pub struct BatchStructure {
    pub graphs: usize,
    pub nodes: usize,
    pub mean_in: Rc<Sparse>,
    pub mean_out: Rc<Sparse>,
    pub mean_pool: Rc<Sparse>,
    pub sum_pool: Rc<Sparse>,
}

impl BatchStructure {
    /// `sizes[i]` nodes and `edges[i]` (local indices) for graph `i`.
    pub fn new(sizes: &[usize], edges: &[&[(usize, usize)]]) -> Self {
        let total: usize = sizes.iter().sum();
        let mut mean_in = Vec::new();
        let mut mean_out = Vec::new();
        let mut mean_pool = Vec::new();
        let mut sum_pool = Vec::new();
        let mut offset = 0;
        for (g, (&n, es)) in sizes.iter().zip(edges).enumerate() {
            let mut indeg = vec![0usize; n];
            let mut outdeg = vec![0usize; n];
            for &(s, d) in es.iter() {
                outdeg[s] += 1;
                indeg[d] += 1;
            }
            for &(s, d) in es.iter() {
                mean_in.push((offset + d, offset + s, 1.0 / indeg[d] as f64));
                mean_out.push((offset + s, offset + d, 1.0 / outdeg[s] as f64));
            }
            for v in 0..n {
                mean_pool.push((g, offset + v, 1.0 / n as f64));
                sum_pool.push((g, offset + v, 1.0));
            }
            offset += n;
        }
        let sq = |entries| Rc::new(Sparse { rows: total, cols: total, entries });
        let pool = |entries| Rc::new(Sparse { rows: sizes.len(), cols: total, entries });
        Self {
            graphs: sizes.len(),
            nodes: total,
            mean_in: sq(mean_in),
            mean_out: sq(mean_out),
            mean_pool: pool(mean_pool),
            sum_pool: pool(sum_pool),
        }
    }

    /// `count` copies of one graph.
    pub fn repeated(n: usize, edges: &[(usize, usize)], count: usize) -> Self {
        let sizes = vec![n; count];
        let es: Vec<&[(usize, usize)]> = vec![edges; count];
        Self::new(&sizes, &es)
    }
}

/// Parameters registered on a tape, in [`GnnParams::tensors`] order.
pub struct ParamVars(pub Vec<Var>);

pub fn register(tape: &mut Tape, p: &GnnParams) -> ParamVars {
    ParamVars(p.tensors().into_iter().map(|t| tape.leaf(t.clone())).collect())
}

/// Dropout masks drawn for one forward pass; `None` disables dropout.
pub struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut ChaCha8Rng,
}

/// Records the forward pass; returns node logits (`nodes x 1`) or graph
/// outputs (`graphs x 4`).
pub fn forward(
    tape: &mut Tape,
    p: &GnnParams,
    vars: &ParamVars,
    x: Var,
    batch: &BatchStructure,
    mut dropout: Option<Dropout<'_>>,
) -> Result<Var> {
    let xv = tape.value(x);
    if xv.ncols() != p.input_dim || xv.nrows() != batch.nodes {
        return Err(Error::Dimension(format!(
            "features are {}x{}, model expects {}x{}",
            xv.nrows(),
            xv.ncols(),
            batch.nodes,
            p.input_dim
        )));
    }
    let mut h = x;
    for l in 0..p.layers.len() {
        let hin = tape.spmm(&batch.mean_in, h);
        let hout = tape.spmm(&batch.mean_out, h);
        let cat = tape.concat(&[h, hin, hout]);
        let z = tape.matmul(cat, vars.0[2 * l]);
        let z = tape.add_bias(z, vars.0[2 * l + 1]);
        h = tape.relu(z);
        if let Some(d) = dropout.as_mut() {
            if d.rate > 0.0 {
                let keep = 1.0 - d.rate;
                let dim = tape.value(h).dim();
                let mask = Array2::from_shape_fn(dim, |_| {
                    if d.rng.gen::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                });
                h = tape.mask(h, mask);
            }
        }
    }
    let hw = vars.0[2 * p.layers.len()];
    let hb = vars.0[2 * p.layers.len() + 1];
    let pre = match p.head_kind {
        HeadKind::Node => h,
        HeadKind::Graph => {
            let mean = tape.spmm(&batch.mean_pool, h);
            let sum = tape.spmm(&batch.sum_pool, h);
            tape.concat(&[mean, sum])
        }
    };
    let out = tape.matmul(pre, hw);
    Ok(tape.add_bias(out, hb))
}

/// Forward pass without gradient bookkeeping; same values as [`forward`]
/// without dropout.
pub fn infer(p: &GnnParams, x: &Array2<f64>, batch: &BatchStructure) -> Result<Array2<f64>> {
    if x.ncols() != p.input_dim || x.nrows() != batch.nodes {
        return Err(Error::Dimension(format!(
            "features are {}x{}, model expects {}x{}",
            x.nrows(),
            x.ncols(),
            batch.nodes,
            p.input_dim
        )));
    }
    let mut h = x.clone();
    for l in &p.layers {
        let d = h.ncols();
        let w = &l.w.0;
        let mut z = h.dot(&w.slice(s![..d, ..]));
        z += &batch.mean_in.apply(&h).dot(&w.slice(s![d..2 * d, ..]));
        z += &batch.mean_out.apply(&h).dot(&w.slice(s![2 * d.., ..]));
        z += &l.b.0;
        z.mapv_inplace(|v| v.max(0.0));
        h = z;
    }
    let pre = match p.head_kind {
        HeadKind::Node => h,
        HeadKind::Graph => {
            let mean = batch.mean_pool.apply(&h);
            let sum = batch.sum_pool.apply(&h);
            ndarray::concatenate(Axis(1), &[mean.view(), sum.view()]).expect("pooled rows match")
        }
    };
    Ok(pre.dot(&p.head.w.0) + &p.head.b.0)
}

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: i32,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl Adam {
    pub fn new(p: &GnnParams, lr: f64) -> Self {
        let zeros: Vec<Array2<f64>> = p.tensors().iter().map(|t| Array2::zeros(t.dim())).collect();
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: zeros.clone(), v: zeros }
    }

    pub fn step(&mut self, p: &mut GnnParams, grads: &[Array2<f64>]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        for (((w, g), m), v) in p.tensors_mut().into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            ndarray::Zip::from(w).and(g).and(m).and(v).for_each(|w, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                *w -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            });
        }
    }
}

/// Gradients of the tape output with respect to the registered parameters.
pub fn param_grads(tape: &Tape, out: Var, vars: &ParamVars, p: &GnnParams) -> Vec<Array2<f64>> {
    let grads = tape.backward(out);
    vars.0
        .iter()
        .zip(p.tensors())
        .map(|(v, t)| grads[v.index()].clone().unwrap_or_else(|| Array2::zeros(t.dim())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Vec<(usize, usize)> {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    }

    #[test]
    fn zero_weights_give_half_probability() {
        let cfg = GnnConfig { layers: 2, hidden: 4, ..GnnConfig::default() };
        let p = GnnParams::init(3, HeadKind::Node, &cfg, 1).zeroed();
        let b = BatchStructure::repeated(4, &chain(4), 1);
        let out = infer(&p, &Array2::from_elem((4, 3), 0.7), &b).unwrap();
        for z in out.iter() {
            assert_eq!(super::super::autodiff::sigmoid(*z), 0.5);
        }
    }

    #[test]
    fn isolated_node_ignores_others() {
        let cfg = GnnConfig { layers: 2, hidden: 5, ..GnnConfig::default() };
        let p = GnnParams::init(3, HeadKind::Node, &cfg, 2);
        let edges = [(1usize, 2usize)];
        let b = BatchStructure::repeated(3, &edges, 1);
        let mut x = Array2::from_shape_fn((3, 3), |(i, j)| (i * 3 + j) as f64 / 10.0);
        let before = infer(&p, &x, &b).unwrap()[[0, 0]];
        x[[1, 0]] = 5.0;
        x[[2, 2]] = -3.0;
        let after = infer(&p, &x, &b).unwrap()[[0, 0]];
        assert_eq!(before, after);
    }

    #[test]
    fn graph_head_is_permutation_invariant() {
        let cfg = GnnConfig { layers: 2, hidden: 6, ..GnnConfig::default() };
        let p = GnnParams::init(3, HeadKind::Graph, &cfg, 3);
        let edges = vec![(0, 1), (0, 2), (1, 3), (2, 3)];
        let x = Array2::from_shape_fn((4, 3), |(i, j)| ((i + 1) * (j + 2)) as f64 / 7.0);
        let a = infer(&p, &x, &BatchStructure::repeated(4, &edges, 1)).unwrap();
        let perm = [2, 0, 3, 1];
        let mut y = Array2::zeros((4, 3));
        for (old, &new) in perm.iter().enumerate() {
            y.row_mut(new).assign(&x.row(old));
        }
        let pe: Vec<(usize, usize)> = edges.iter().map(|&(s, d)| (perm[s], perm[d])).collect();
        let b = infer(&p, &y, &BatchStructure::repeated(4, &pe, 1)).unwrap();
        for (u, v) in a.iter().zip(b.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn infer_matches_tape_forward() {
        let cfg = GnnConfig { layers: 3, hidden: 7, ..GnnConfig::default() };
        let edges = vec![(0, 1), (1, 2), (0, 2), (2, 3)];
        let b = BatchStructure::repeated(4, &edges, 2);
        let x = Array2::from_shape_fn((8, 5), |(i, j)| ((i * 5 + j) % 7) as f64 / 3.0 - 1.0);
        for kind in [HeadKind::Node, HeadKind::Graph] {
            let p = GnnParams::init(5, kind, &cfg, 9);
            let mut tape = Tape::new();
            let vars = register(&mut tape, &p);
            let xv = tape.leaf(x.clone());
            let out = forward(&mut tape, &p, &vars, xv, &b, None).unwrap();
            let direct = infer(&p, &x, &b).unwrap();
            for (u, v) in tape.value(out).iter().zip(direct.iter()) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn checkpoint_matrix_round_trip() {
        let cfg = GnnConfig { layers: 1, hidden: 2, ..GnnConfig::default() };
        let p = GnnParams::init(3, HeadKind::Graph, &cfg, 4);
        let text = serde_json::to_string(&p).unwrap();
        let q: GnnParams = serde_json::from_str(&text).unwrap();
        assert_eq!(p, q);
    }
}
