// SPDX-License-Identifier: Apache-2.0

//! Training, checkpointing and prediction for the two-stage model and its
//! single-stage ablation.

use std::collections::BTreeMap;

use ndarray::{concatenate, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::autodiff::Tape;
use super::gnn::{self, Adam, BatchStructure, Dropout, GnnConfig, GnnParams, HeadKind, GRAPH_OUTPUTS};
use super::metrics::PredictionReport;
use crate::accel_graph::features::{edge_indices, raw_features};
use crate::accel_graph::{canonicalize, AcceleratorGraph, Configuration, NormStats};
use crate::dataset::{Sample, SplitDataset};
use crate::error::{Error, Result};
use crate::quality_oracle::QualityReport;
use crate::unit_library::{derive_seed, Library};

/// Graphs per inference chunk.
const INFER_CHUNK: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Node classifier feeding predicted critical bits to the regressor.
    TwoStage,
    /// Regressor on stage-1 features alone.
    SingleStage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Loss {
    /// Mean binary cross-entropy of node logits.
    Bce,
    /// Mean squared error of graph outputs.
    Mse,
}

/// Per-target z-score parameters fitted on the training split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub mean: [f64; 4],
    pub std: [f64; 4],
}

impl TargetScaling {
    /// A target with zero spread gets scale 1.
    pub fn fit(targets: &[[f64; 4]]) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Model("empty training set".into()));
        }
        let n = targets.len() as f64;
        let mut mean = [0.0; 4];
        let mut std = [0.0; 4];
        for t in 0..4 {
            mean[t] = targets.iter().map(|v| v[t]).sum::<f64>() / n;
            let var = targets.iter().map(|v| (v[t] - mean[t]).powi(2)).sum::<f64>() / n;
            std[t] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Ok(Self { mean, std })
    }

    pub fn scale(&self, v: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|t| (v[t] - self.mean[t]) / self.std[t])
    }

    pub fn unscale(&self, z: &[f64]) -> [f64; 4] {
        std::array::from_fn(|t| z[t] * self.std[t] + self.mean[t])
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Full training-set loss before the first update.
    pub stage1_initial: Option<f64>,
    /// Mean batch loss of every epoch.
    pub stage1_epochs: Vec<f64>,
    pub stage1_final: Option<f64>,
    pub stage2_initial: f64,
    pub stage2_epochs: Vec<f64>,
    pub stage2_final: f64,
    /// Per-epoch r2 of each target on the held-out split (`None` when not
    /// applicable or when there is no held-out data).
    pub validation_r2: Vec<[Option<f64>; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateModel {
    pub kind: ModelKind,
    pub config: GnnConfig,
    pub graph: String,
    pub node_ids: Vec<String>,
    pub norm: NormStats,
    pub scaling: TargetScaling,
    pub stage1: Option<GnnParams>,
    pub stage2: GnnParams,
    pub log: TrainingLog,
}

/// Encoded graphs that share one topology.
pub struct Prepared {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    /// Stage-1 features of each sample.
    pub features: Vec<Array2<f64>>,
}

impl Prepared {
    pub fn new(g: &AcceleratorGraph, lib: &Library, norm: &NormStats, configs: &[&Configuration]) -> Result<Self> {
        let features = configs
            .iter()
            .map(|c| {
                let mut x = raw_features(g, c, lib)?;
                norm.apply(&mut x);
                Ok(x)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes: g.nodes.len(), edges: edge_indices(g)?, features })
    }

    fn from_samples(g: &AcceleratorGraph, lib: &Library, norm: &NormStats, samples: &[Sample]) -> Result<Self> {
        let configs: Vec<&Configuration> = samples.iter().map(|s| &s.config).collect();
        Self::new(g, lib, norm, &configs)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Appends one 0/1 column.
pub fn augment(x: &Array2<f64>, bits: &[bool]) -> Array2<f64> {
    let col = Array2::from_shape_fn((x.nrows(), 1), |(i, _)| if bits[i] { 1.0 } else { 0.0 });
    concatenate(Axis(1), &[x.view(), col.view()]).expect("row counts match")
}

fn stack(parts: &[&Array2<f64>]) -> Array2<f64> {
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    concatenate(Axis(0), &views).expect("column counts match")
}

/// Loss of `params` on one batch and the gradient of every parameter tensor.
pub fn batch_loss_and_grads(
    params: &GnnParams,
    inputs: &[&Array2<f64>],
    targets: &[&Array2<f64>],
    edges: &[(usize, usize)],
    loss: Loss,
    dropout: Option<Dropout<'_>>,
) -> Result<(f64, Vec<Array2<f64>>)> {
    let nodes = inputs[0].nrows();
    let batch = BatchStructure::repeated(nodes, edges, inputs.len());
    let mut tape = Tape::new();
    let vars = gnn::register(&mut tape, params);
    let x = tape.leaf(stack(inputs));
    let out = gnn::forward(&mut tape, params, &vars, x, &batch, dropout)?;
    let y = stack(targets);
    let l = match loss {
        Loss::Bce => tape.bce_logits(out, y),
        Loss::Mse => tape.mse(out, y),
    };
    let value = tape.value(l)[[0, 0]];
    Ok((value, gnn::param_grads(&tape, l, &vars, params)))
}

/// Loss without gradients, evaluated chunk by chunk; equals the mean over
/// all samples.
pub fn dataset_loss(
    params: &GnnParams,
    inputs: &[Array2<f64>],
    targets: &[Array2<f64>],
    edges: &[(usize, usize)],
    loss: Loss,
) -> Result<f64> {
    let mut total = 0.0;
    let mut count = 0usize;
    for (xs, ys) in inputs.chunks(INFER_CHUNK).zip(targets.chunks(INFER_CHUNK)) {
        let nodes = xs[0].nrows();
        let batch = BatchStructure::repeated(nodes, edges, xs.len());
        let refs: Vec<&Array2<f64>> = xs.iter().collect();
        let out = gnn::infer(params, &stack(&refs), &batch)?;
        let y_refs: Vec<&Array2<f64>> = ys.iter().collect();
        let y = stack(&y_refs);
        total += match loss {
            Loss::Bce => out
                .iter()
                .zip(y.iter())
                .map(|(&z, &t)| z.max(0.0) - z * t + (-z.abs()).exp().ln_1p())
                .sum::<f64>(),
            Loss::Mse => out.iter().zip(y.iter()).map(|(p, t)| (p - t).powi(2)).sum::<f64>(),
        };
        count += y.len();
    }
    Ok(total / count as f64)
}

/// Mini-batch Adam over whole graphs. Returns the mean batch loss of every
/// epoch; `after_epoch` runs once per epoch with the current parameters.
#[allow(clippy::too_many_arguments)]
fn fit(
    params: &mut GnnParams,
    inputs: &[Array2<f64>],
    targets: &[Array2<f64>],
    edges: &[(usize, usize)],
    loss: Loss,
    cfg: &GnnConfig,
    seed: u64,
    mut after_epoch: impl FnMut(&GnnParams) -> Result<()>,
) -> Result<Vec<f64>> {
    let mut adam = Adam::new(params, cfg.learning_rate);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "shuffle"));
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "dropout"));
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        adam.lr = cfg.learning_rate_at(epoch);
        order.shuffle(&mut shuffle_rng);
        let mut sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let xs: Vec<&Array2<f64>> = chunk.iter().map(|&i| &inputs[i]).collect();
            let ys: Vec<&Array2<f64>> = chunk.iter().map(|&i| &targets[i]).collect();
            let dropout = (cfg.dropout > 0.0).then(|| Dropout { rate: cfg.dropout, rng: &mut dropout_rng });
            let (l, grads) = batch_loss_and_grads(params, &xs, &ys, edges, loss, dropout)?;
            if !l.is_finite() {
                return Err(Error::Model(format!("training loss became {l}")));
            }
            adam.step(params, &grads);
            sum += l;
            batches += 1;
        }
        trace.push(sum / batches as f64);
        after_epoch(params)?;
    }
    if !params.is_finite() {
        return Err(Error::Model("parameters became non-finite".into()));
    }
    Ok(trace)
}

fn critical_targets(split: &[Sample], g: &AcceleratorGraph) -> Vec<Array2<f64>> {
    split
        .iter()
        .map(|s| {
            let bits = s.report.critical_bits(g);
            Array2::from_shape_fn((bits.len(), 1), |(i, _)| if bits[i] { 1.0 } else { 0.0 })
        })
        .collect()
}

pub struct Stage1 {
    pub params: GnnParams,
    pub initial_loss: f64,
    pub epoch_losses: Vec<f64>,
    pub final_loss: f64,
}

/// Node-level critical-path classifier trained with binary cross-entropy.
pub fn train_stage1(split: &SplitDataset, g: &AcceleratorGraph, lib: &Library, cfg: &GnnConfig) -> Result<Stage1> {
    cfg.validate()?;
    if split.train.is_empty() {
        return Err(Error::Model("empty training set".into()));
    }
    let data = Prepared::from_samples(g, lib, &split.norm, &split.train)?;
    let targets = critical_targets(&split.train, g);
    let seed = derive_seed(cfg.seed, "stage1");
    let mut params = GnnParams::init(data.features[0].ncols(), HeadKind::Node, cfg, derive_seed(seed, "init"));
    let initial_loss = dataset_loss(&params, &data.features, &targets, &data.edges, Loss::Bce)?;
    let epoch_losses = fit(&mut params, &data.features, &targets, &data.edges, Loss::Bce, cfg, seed, |_| Ok(()))?;
    let final_loss = dataset_loss(&params, &data.features, &targets, &data.edges, Loss::Bce)?;
    Ok(Stage1 { params, initial_loss, epoch_losses, final_loss })
}

/// Critical flags predicted by a stage-1 network (`sigmoid(z) > 0.5`).
pub fn predict_critical(params: &GnnParams, data: &Prepared) -> Result<Vec<Vec<bool>>> {
    let mut out = Vec::with_capacity(data.len());
    for xs in data.features.chunks(INFER_CHUNK) {
        let batch = BatchStructure::repeated(data.nodes, &data.edges, xs.len());
        let refs: Vec<&Array2<f64>> = xs.iter().collect();
        let z = gnn::infer(params, &stack(&refs), &batch)?;
        for k in 0..xs.len() {
            out.push((0..data.nodes).map(|v| z[[k * data.nodes + v, 0]] > 0.0).collect());
        }
    }
    Ok(out)
}

fn stage2_inputs(stage1: Option<&GnnParams>, data: &Prepared) -> Result<Vec<Array2<f64>>> {
    match stage1 {
        None => Ok(data.features.clone()),
        Some(p) => {
            let bits = predict_critical(p, data)?;
            Ok(data.features.iter().zip(&bits).map(|(x, b)| augment(x, b)).collect())
        }
    }
}

fn graph_outputs(params: &GnnParams, nodes: usize, edges: &[(usize, usize)], inputs: &[Array2<f64>]) -> Result<Vec<[f64; 4]>> {
    let mut out = Vec::with_capacity(inputs.len());
    for xs in inputs.chunks(INFER_CHUNK) {
        let batch = BatchStructure::repeated(nodes, edges, xs.len());
        let refs: Vec<&Array2<f64>> = xs.iter().collect();
        let z = gnn::infer(params, &stack(&refs), &batch)?;
        out.extend(z.rows().into_iter().map(|r| std::array::from_fn(|t| r[t])));
    }
    Ok(out)
}

pub struct Stage2 {
    pub params: GnnParams,
    pub scaling: TargetScaling,
    pub initial_loss: f64,
    pub epoch_losses: Vec<f64>,
    pub final_loss: f64,
    pub validation_r2: Vec<[Option<f64>; 4]>,
}

/// Graph-level regressor on standardized targets. With `stage1` present the
/// node features carry its predicted critical bits.
pub fn train_stage2(
    split: &SplitDataset,
    g: &AcceleratorGraph,
    lib: &Library,
    stage1: Option<&GnnParams>,
    cfg: &GnnConfig,
) -> Result<Stage2> {
    cfg.validate()?;
    if split.train.is_empty() {
        return Err(Error::Model("empty training set".into()));
    }
    let data = Prepared::from_samples(g, lib, &split.norm, &split.train)?;
    let actual: Vec<[f64; 4]> = split.train.iter().map(|s| s.report.targets()).collect();
    let scaling = TargetScaling::fit(&actual)?;
    let targets: Vec<Array2<f64>> = actual
        .iter()
        .map(|v| Array2::from_shape_vec((1, GRAPH_OUTPUTS), scaling.scale(v).to_vec()).expect("4 targets"))
        .collect();
    let inputs = stage2_inputs(stage1, &data)?;

    let held_out = if split.test.is_empty() {
        None
    } else {
        let d = Prepared::from_samples(g, lib, &split.norm, &split.test)?;
        let x = stage2_inputs(stage1, &d)?;
        let y: Vec<[f64; 4]> = split.test.iter().map(|s| s.report.targets()).collect();
        Some((x, y))
    };
    let mut validation_r2 = Vec::new();

    let seed = derive_seed(cfg.seed, "stage2");
    let mut params = GnnParams::init(inputs[0].ncols(), HeadKind::Graph, cfg, derive_seed(seed, "init"));
    let initial_loss = dataset_loss(&params, &inputs, &targets, &data.edges, Loss::Mse)?;
    let epoch_losses = fit(&mut params, &inputs, &targets, &data.edges, Loss::Mse, cfg, seed, |p| {
        if let Some((x, y)) = &held_out {
            let pred: Vec<[f64; 4]> = graph_outputs(p, data.nodes, &data.edges, x)?
                .iter()
                .map(|z| scaling.unscale(z))
                .collect();
            let report = PredictionReport::from_targets(&pred, y, None)?;
            validation_r2.push(std::array::from_fn(|t| report.targets[t].r2));
        }
        Ok(())
    })?;
    let final_loss = dataset_loss(&params, &inputs, &targets, &data.edges, Loss::Mse)?;
    Ok(Stage2 { params, scaling, initial_loss, epoch_losses, final_loss, validation_r2 })
}

/// Trains both stages (or the ablation) on `split`.
pub fn train(
    split: &SplitDataset,
    g: &AcceleratorGraph,
    lib: &Library,
    cfg: &GnnConfig,
    kind: ModelKind,
) -> Result<SurrogateModel> {
    let s1 = match kind {
        ModelKind::TwoStage => Some(train_stage1(split, g, lib, cfg)?),
        ModelKind::SingleStage => None,
    };
    let s2 = train_stage2(split, g, lib, s1.as_ref().map(|s| &s.params), cfg)?;
    let log = TrainingLog {
        stage1_initial: s1.as_ref().map(|s| s.initial_loss),
        stage1_epochs: s1.as_ref().map(|s| s.epoch_losses.clone()).unwrap_or_default(),
        stage1_final: s1.as_ref().map(|s| s.final_loss),
        stage2_initial: s2.initial_loss,
        stage2_epochs: s2.epoch_losses,
        stage2_final: s2.final_loss,
        validation_r2: s2.validation_r2,
    };
    Ok(SurrogateModel {
        kind,
        config: cfg.clone(),
        graph: g.name.clone(),
        node_ids: g.nodes.iter().map(|n| n.id.clone()).collect(),
        norm: split.norm.clone(),
        scaling: s2.scaling,
        stage1: s1.map(|s| s.params),
        stage2: s2.params,
        log,
    })
}

impl SurrogateModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s1) = &self.stage1 {
            if s1.head_kind != HeadKind::Node || self.stage2.input_dim != s1.input_dim + 1 {
                return Err(Error::Model("stage-2 input must be stage-1 input plus the critical bit".into()));
            }
            if !s1.is_finite() {
                return Err(Error::Model("stage-1 parameters are not finite".into()));
            }
        } else if self.kind == ModelKind::TwoStage {
            return Err(Error::Model("two-stage model without a stage-1 network".into()));
        }
        if self.stage2.head_kind != HeadKind::Graph || !self.stage2.is_finite() {
            return Err(Error::Model("stage-2 network is malformed".into()));
        }
        Ok(())
    }

    fn check_graph(&self, g: &AcceleratorGraph) -> Result<()> {
        let ids: Vec<&str> = g.nodes.iter().map(|n| n.id.as_str()).collect();
        if ids != self.node_ids.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Model(format!(
                "model was trained on graph `{}` with a different node list than `{}`",
                self.graph, g.name
            )));
        }
        Ok(())
    }

    /// Predicted report for one configuration.
    pub fn predict(&self, g: &AcceleratorGraph, lib: &Library, c: &Configuration) -> Result<QualityReport> {
        Ok(self.predict_batch(g, lib, std::slice::from_ref(c), 1)?.remove(0))
    }

    /// Predicted reports for many configurations; chunks run on `workers`
    /// threads and the output does not depend on the worker count.
    pub fn predict_batch(
        &self,
        g: &AcceleratorGraph,
        lib: &Library,
        configs: &[Configuration],
        workers: usize,
    ) -> Result<Vec<QualityReport>> {
        self.check_graph(g)?;
        let canon: Vec<Configuration> = configs.iter().map(|c| canonicalize(g, c)).collect();
        let edges = edge_indices(g)?;
        let run = |chunk: &[Configuration]| -> Result<Vec<QualityReport>> {
            let refs: Vec<&Configuration> = chunk.iter().collect();
            let data = Prepared::new(g, lib, &self.norm, &refs)?;
            let bits = match &self.stage1 {
                Some(p) => Some(predict_critical(p, &data)?),
                None => None,
            };
            let inputs = match &bits {
                Some(b) => data.features.iter().zip(b).map(|(x, b)| augment(x, b)).collect(),
                None => data.features,
            };
            let z = graph_outputs(&self.stage2, data.nodes, &edges, &inputs)?;
            Ok(z
                .iter()
                .enumerate()
                .map(|(i, z)| {
                    let [area, power, latency, ssim] = self.scaling.unscale(z);
                    let critical = match &bits {
                        Some(b) => g.nodes.iter().zip(&b[i]).map(|(n, &c)| (n.id.clone(), c as u8)).collect(),
                        None => BTreeMap::new(),
                    };
                    QualityReport { area, power, latency, ssim, critical }
                })
                .collect())
        };
        if workers <= 1 {
            return canon.chunks(INFER_CHUNK).map(run).collect::<Result<Vec<_>>>().map(|v| v.concat());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Model(format!("thread pool: {e}")))?;
        pool.install(|| canon.par_chunks(INFER_CHUNK).map(run).collect::<Result<Vec<_>>>())
            .map(|v| v.concat())
    }

    /// r2 / MAPE of every target and node accuracy on labeled samples.
    pub fn evaluate(&self, g: &AcceleratorGraph, lib: &Library, samples: &[Sample]) -> Result<PredictionReport> {
        if samples.is_empty() {
            return Err(Error::Metric("no samples to evaluate".into()));
        }
        let configs: Vec<Configuration> = samples.iter().map(|s| s.config.clone()).collect();
        let pred = self.predict_batch(g, lib, &configs, 1)?;
        let accuracy = self.stage1.as_ref().map(|_| {
            let mut hit = 0usize;
            let mut total = 0usize;
            for (p, s) in pred.iter().zip(samples) {
                for (a, b) in p.critical_bits(g).iter().zip(s.report.critical_bits(g)) {
                    hit += (*a == b) as usize;
                    total += 1;
                }
            }
            hit as f64 / total as f64
        });
        let p: Vec<[f64; 4]> = pred.iter().map(|r| r.targets()).collect();
        let a: Vec<[f64; 4]> = samples.iter().map(|s| s.report.targets()).collect();
        PredictionReport::from_targets(&p, &a, accuracy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel_graph::{load_benchmark, Benchmark, DesignSpace};
    use crate::dataset::{label, sample_configs, split};
    use crate::quality_oracle::{ImageSet, Oracle};
    use crate::unit_library::{GroupKey, LibraryMetadata, Scheme, UnitCandidate};

    fn lib(groups: &[GroupKey]) -> Library {
        let mut cands = vec![];
        for &g in groups {
            cands.push(UnitCandidate::exact(g));
            for k in 1..=3 {
                cands.push(UnitCandidate::new(g, Scheme::Truncated, k));
            }
        }
        let meta = LibraryMetadata {
            seed: 0,
            input_distribution: "uniform".into(),
            exhaustive_limit: 0,
            sample_count: 0,
        };
        Library::new(meta, cands).unwrap()
    }

    fn data(b: Benchmark, groups: &[GroupKey], n: usize) -> (AcceleratorGraph, Library, SplitDataset) {
        let g = load_benchmark(b);
        let l = lib(groups);
        let oracle = Oracle::new(b, g.clone(), l.clone(), ImageSet::bundled()).unwrap();
        let s = sample_configs(&g, oracle.space(), n, 2).unwrap();
        let samples = label(&oracle, &s, 2, 1).unwrap().samples;
        let sp = split(&samples, 0.8, 3, &g, &l).unwrap();
        (g, l, sp)
    }

    fn sobel() -> (AcceleratorGraph, Library, SplitDataset) {
        data(Benchmark::Sobel, &[GroupKey::add(8), GroupKey::add(12), GroupKey::sub(10)], 40)
    }

    fn tiny() -> GnnConfig {
        GnnConfig { layers: 2, hidden: 8, epochs: 8, learning_rate: 1e-2, ..GnnConfig::default() }
    }

    #[test]
    fn training_lowers_both_losses() {
        let (g, l, sp) = sobel();
        let m = train(&sp, &g, &l, &tiny(), ModelKind::TwoStage).unwrap();
        assert!(m.log.stage1_final.unwrap() < m.log.stage1_initial.unwrap());
        assert!(m.log.stage2_final < m.log.stage2_initial);
        assert_eq!(m.log.stage2_epochs.len(), 8);
        assert_eq!(m.log.validation_r2.len(), 8);
    }

    #[test]
    fn stage2_input_carries_the_critical_bit() {
        let (g, l, sp) = sobel();
        let m = train(&sp, &g, &l, &tiny(), ModelKind::TwoStage).unwrap();
        assert_eq!(m.stage2.input_dim, m.stage1.as_ref().unwrap().input_dim + 1);
        let single = train(&sp, &g, &l, &tiny(), ModelKind::SingleStage).unwrap();
        assert_eq!(single.stage2.input_dim, m.stage1.as_ref().unwrap().input_dim);
        let mut broken = m.clone();
        broken.stage1 = None;
        assert!(broken.validate().is_err());
    }

    #[test]
    fn prediction_is_deterministic_and_worker_independent() {
        let (g, l, sp) = sobel();
        let m = train(&sp, &g, &l, &tiny(), ModelKind::TwoStage).unwrap();
        let configs: Vec<Configuration> = sp.train.iter().map(|s| s.config.clone()).collect();
        let a = m.predict_batch(&g, &l, &configs, 1).unwrap();
        let b = m.predict_batch(&g, &l, &configs, 1).unwrap();
        let c = m.predict_batch(&g, &l, &configs, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(m.predict(&g, &l, &configs[0]).unwrap(), a[0]);
    }

    #[test]
    fn orbit_permuted_configuration_predicts_identically() {
        let (g, l, sp) = data(Benchmark::Gaussian, &[GroupKey::mul(8, 4), GroupKey::add(16)], 20);
        let m = train(&sp, &g, &l, &GnnConfig { epochs: 2, ..tiny() }, ModelKind::TwoStage).unwrap();
        let space = DesignSpace::new(&g, &l).unwrap();
        let mut genome = vec![0; space.len()];
        let corners = ["mul_00", "mul_02", "mul_20", "mul_22"];
        for (k, id) in corners.iter().enumerate() {
            let i = space.node_ids.iter().position(|n| n == id).unwrap();
            genome[i] = k;
        }
        let c = space.to_config(&genome);
        let mut rotated = c.clone();
        for (k, id) in corners.iter().enumerate() {
            rotated.set(id, c.get(corners[(k + 1) % 4]).unwrap());
        }
        assert_ne!(c, rotated);
        let a = m.predict(&g, &l, &c).unwrap();
        let b = m.predict(&g, &l, &rotated).unwrap();
        assert_eq!([a.area, a.power, a.latency, a.ssim], [b.area, b.power, b.latency, b.ssim]);
    }

    #[test]
    fn checkpoint_round_trip_preserves_predictions() {
        let (g, l, sp) = sobel();
        let m = train(&sp, &g, &l, &tiny(), ModelKind::TwoStage).unwrap();
        let back = SurrogateModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let c = &sp.test[0].config;
        assert_eq!(back.predict(&g, &l, c).unwrap(), m.predict(&g, &l, c).unwrap());
        assert!(SurrogateModel::from_json("{}").is_err());
    }

    #[test]
    fn all_critical_labels_are_learned_exactly() {
        let (g, l, mut sp) = sobel();
        for s in sp.train.iter_mut().chain(sp.test.iter_mut()) {
            for v in s.report.critical.values_mut() {
                *v = 1;
            }
        }
        let m = train(&sp, &g, &l, &GnnConfig { epochs: 20, ..tiny() }, ModelKind::TwoStage).unwrap();
        let r = m.evaluate(&g, &l, &sp.test).unwrap();
        assert_eq!(r.critical_accuracy, Some(1.0));
    }

    #[test]
    fn other_graph_is_rejected() {
        let (g, l, sp) = sobel();
        let m = train(&sp, &g, &l, &GnnConfig { epochs: 1, ..tiny() }, ModelKind::SingleStage).unwrap();
        let other = load_benchmark(Benchmark::Gaussian);
        assert!(m.predict_batch(&other, &l, &[], 1).is_err());
    }

    #[test]
    fn target_scaling_inverts() {
        let t = TargetScaling::fit(&[[1.0, 2.0, 3.0, 0.5], [3.0, 2.0, 5.0, 0.7]]).unwrap();
        assert_eq!(t.std[1], 1.0);
        let v = [2.5, 2.0, 4.0, 0.6];
        let back = t.unscale(&t.scale(&v));
        for k in 0..4 {
            assert!((back[k] - v[k]).abs() < 1e-12);
        }
        assert!(TargetScaling::fit(&[]).is_err());
    }
}
