// SPDX-License-Identifier: Apache-2.0

//! Random-forest regression baseline.
//!
//! Inputs are the raw per-unit features of every approximable node in graph
//! order, concatenated: area, power, latency, mae, mre, mse, wce and
//! approximation level. There is no critical-path information.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::PredictionReport;
use crate::accel_graph::{canonicalize, AcceleratorGraph, Configuration};
use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::unit_library::{derive_seed, Library};

pub const UNIT_FEATURES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self { trees: 100, max_depth: 12, seed: 0 }
    }
}

/// Flattened feature vector of one configuration.
pub fn flatten(g: &AcceleratorGraph, lib: &Library, c: &Configuration) -> Result<Vec<f64>> {
    let c = canonicalize(g, c);
    let mut out = Vec::with_capacity(g.approximable_count() * UNIT_FEATURES);
    for id in g.approximable_ids() {
        let cid = c
            .get(id)
            .ok_or_else(|| Error::Configuration(format!("node `{id}` is unassigned")))?;
        let u = lib
            .get(cid)
            .ok_or_else(|| Error::Configuration(format!("unknown candidate `{cid}`")))?;
        out.extend([
            u.ppa.area,
            u.ppa.power,
            u.ppa.latency,
            u.errors.mae,
            u.errors.mre,
            u.errors.mse,
            u.errors.wce,
            u.approx_level,
        ]);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART regression tree; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Grows a tree on rows `idx` (repeats allowed), trying `mtry` random
    /// features at each split.
    pub fn fit(x: &[Vec<f64>], y: &[f64], idx: Vec<usize>, max_depth: usize, mtry: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut tree = Tree { nodes: Vec::new() };
        tree.grow(x, y, idx, 0, max_depth, mtry, rng);
        tree
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &mut self,
        x: &[Vec<f64>],
        y: &[f64],
        mut idx: Vec<usize>,
        depth: usize,
        max_depth: usize,
        mtry: usize,
        rng: &mut ChaCha8Rng,
    ) -> usize {
        let me = self.nodes.len();
        let mean = idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
        self.nodes.push(TreeNode::Leaf { value: mean });
        if depth >= max_depth || idx.len() < 2 {
            return me;
        }
        let Some((feature, threshold)) = best_split(x, y, &mut idx, mtry, rng) else {
            return me;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.into_iter().partition(|&i| x[i][feature] <= threshold);
        let left = self.grow(x, y, l, depth + 1, max_depth, mtry, rng);
        let right = self.grow(x, y, r, depth + 1, max_depth, mtry, rng);
        self.nodes[me] = TreeNode::Split { feature, threshold, left, right };
        me
    }
}

/// Split with the largest reduction in squared error, or `None` when no
/// sampled feature separates the rows or the targets are constant.
fn best_split(
    x: &[Vec<f64>],
    y: &[f64],
    idx: &mut [usize],
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, f64)> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| y[i]).sum();
    let total_sq: f64 = idx.iter().map(|&i| y[i] * y[i]).sum();
    let parent_sse = total_sq - total * total / n as f64;
    if parent_sse <= 1e-12 * total_sq.max(1.0) {
        return None;
    }
    let d = x[0].len();
    let mut best: Option<(f64, usize, f64)> = None;
    for f in sample(rng, d, mtry.min(d)).into_iter() {
        idx.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for k in 0..n - 1 {
            let yi = y[idx[k]];
            left_sum += yi;
            left_sq += yi * yi;
            let (lo, hi) = (x[idx[k]][f], x[idx[k + 1]][f]);
            if lo == hi {
                continue;
            }
            let nl = (k + 1) as f64;
            let nr = (n - k - 1) as f64;
            let right_sum = total - left_sum;
            let right_sq = total_sq - left_sq;
            let sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
            if best.map_or(true, |(b, _, _)| sse < b) {
                best = Some((sse, f, lo + (hi - lo) / 2.0));
            }
        }
    }
    best.filter(|(sse, _, _)| *sse < parent_sse).map(|(_, f, t)| (f, t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Bagged trees, each on a bootstrap sample with its own seed.
    pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: &ForestConfig, seed: u64) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::Model("forest needs a non-empty training set".into()));
        }
        let d = x[0].len();
        let mtry = ((d as f64).sqrt().round() as usize).max(1);
        let trees = (0..cfg.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("tree{t}")));
                let idx: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect();
                Tree::fit(x, y, idx, cfg.max_depth, mtry, &mut rng)
            })
            .collect();
        Ok(Self { trees })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

/// One forest per target: area, power, latency, ssim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub config: ForestConfig,
    pub graph: String,
    pub forests: Vec<Forest>,
}

pub fn train_forest(samples: &[Sample], g: &AcceleratorGraph, lib: &Library, cfg: &ForestConfig) -> Result<ForestModel> {
    if samples.is_empty() {
        return Err(Error::Model("empty training set".into()));
    }
    if cfg.trees == 0 {
        return Err(Error::Model("a forest needs at least one tree".into()));
    }
    let x = samples
        .iter()
        .map(|s| flatten(g, lib, &s.config))
        .collect::<Result<Vec<_>>>()?;
    let mut forests = Vec::with_capacity(4);
    for t in 0..4 {
        let y: Vec<f64> = samples.iter().map(|s| s.report.targets()[t]).collect();
        forests.push(Forest::fit(&x, &y, cfg, derive_seed(cfg.seed, &format!("target{t}")))?);
    }
    Ok(ForestModel { config: cfg.clone(), graph: g.name.clone(), forests })
}

impl ForestModel {
    pub fn predict(&self, g: &AcceleratorGraph, lib: &Library, c: &Configuration) -> Result<[f64; 4]> {
        let x = flatten(g, lib, c)?;
        Ok(std::array::from_fn(|t| self.forests[t].predict(&x)))
    }

    pub fn evaluate(&self, g: &AcceleratorGraph, lib: &Library, samples: &[Sample]) -> Result<PredictionReport> {
        let pred = samples
            .iter()
            .map(|s| self.predict(g, lib, &s.config))
            .collect::<Result<Vec<_>>>()?;
        let actual: Vec<[f64; 4]> = samples.iter().map(|s| s.report.targets()).collect();
        PredictionReport::from_targets(&pred, &actual, None)
    }
}
