// SPDX-License-Identifier: Apache-2.0

//! Per-node feature encoding.
//!
//! Column layout (stage 1):
//!
//! | cols | feature |
//! |------|---------|
//! | 0-2 | area, power, latency (min-max normalized) |
//! | 3-8 | compute type one-hot: control, memory, add, sub, mul, sqrt |
//! | 9-12 | mae, mre, mse, wce (`ln(1 + x)`, then min-max normalized) |
//! | 13 | approximation level in `[0, 1]` |
//!
//! Stage 2 appends column 14, the on-critical-path bit.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{AcceleratorGraph, Configuration, NodeRole};
use crate::error::{Error, Result};
use crate::unit_library::{Library, OpKind};

pub const FEATURE_DIM: usize = 14;
/// Columns that go through min-max normalization.
pub const CONTINUOUS: [usize; 7] = [0, 1, 2, 9, 10, 11, 12];
pub const CLIP_LOW: f64 = -0.5;
pub const CLIP_HIGH: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComputeType {
    Control,
    Memory,
    Add,
    Sub,
    Mul,
    Sqrt,
}

impl ComputeType {
    pub fn of(role: &NodeRole) -> Self {
        let from_kind = |k: OpKind| match k {
            OpKind::Add => ComputeType::Add,
            OpKind::Sub => ComputeType::Sub,
            OpKind::Mul => ComputeType::Mul,
            OpKind::Sqrt => ComputeType::Sqrt,
        };
        match role {
            NodeRole::ApproximableArith { group } => from_kind(group.kind),
            NodeRole::FixedArith { kind, .. } => from_kind(*kind),
            NodeRole::FixedMemory => ComputeType::Memory,
            NodeRole::FixedControl | NodeRole::Io => ComputeType::Control,
        }
    }

    fn column(self) -> usize {
        3 + self as usize
    }
}

/// Unnormalized stage-1 features, one row per node in graph order.
pub fn raw_features(g: &AcceleratorGraph, c: &Configuration, lib: &Library) -> Result<Array2<f64>> {
    let mut x = Array2::zeros((g.nodes.len(), FEATURE_DIM));
    for (i, node) in g.nodes.iter().enumerate() {
        let mut row = x.row_mut(i);
        row[ComputeType::of(&node.role).column()] = 1.0;
        if node.role.is_approximable() {
            let id = c
                .get(&node.id)
                .ok_or_else(|| Error::Configuration(format!("node `{}` is unassigned", node.id)))?;
            let cand = lib
                .get(id)
                .ok_or_else(|| Error::Configuration(format!("unknown candidate `{id}`")))?;
            if Some(cand.group()) != node.group() {
                return Err(Error::Configuration(format!(
                    "candidate `{id}` does not fit node `{}`",
                    node.id
                )));
            }
            row[0] = cand.ppa.area;
            row[1] = cand.ppa.power;
            row[2] = cand.ppa.latency;
            row[9] = cand.errors.mae.ln_1p();
            row[10] = cand.errors.mre.ln_1p();
            row[11] = cand.errors.mse.ln_1p();
            row[12] = cand.errors.wce.ln_1p();
            row[13] = cand.approx_level;
        } else {
            let p = node.fixed_ppa.unwrap_or_default();
            row[0] = p.area;
            row[1] = p.power;
            row[2] = p.latency;
        }
    }
    Ok(x)
}

/// Per-column min and max of the continuous features over a training split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a Array2<f64>>) -> Result<Self> {
        let mut min = vec![f64::INFINITY; CONTINUOUS.len()];
        let mut max = vec![f64::NEG_INFINITY; CONTINUOUS.len()];
        let mut any = false;
        for x in rows {
            for row in x.rows() {
                any = true;
                for (j, &col) in CONTINUOUS.iter().enumerate() {
                    min[j] = min[j].min(row[col]);
                    max[j] = max[j].max(row[col]);
                }
            }
        }
        if !any {
            return Err(Error::Dataset("cannot fit normalization on no rows".into()));
        }
        Ok(Self { min, max })
    }

    /// Min-max scales the continuous columns in place and clips them.
    pub fn apply(&self, x: &mut Array2<f64>) {
        for mut row in x.rows_mut() {
            for (j, &col) in CONTINUOUS.iter().enumerate() {
                let span = self.max[j] - self.min[j];
                let v = if span > 0.0 { (row[col] - self.min[j]) / span } else { 0.0 };
                row[col] = v.clamp(CLIP_LOW, CLIP_HIGH);
            }
        }
    }
}

/// Feature matrix plus directed edge list (node indices in graph order).
#[derive(Clone, Debug, PartialEq)]
pub struct Encoded {
    pub features: Array2<f64>,
    pub edges: Vec<(usize, usize)>,
}

/// Normalized node features; with `crit` present a stage-2 matrix with the
/// critical bit in the last column.
pub fn encode_features(
    g: &AcceleratorGraph,
    c: &Configuration,
    lib: &Library,
    crit: Option<&[bool]>,
    norm: Option<&NormStats>,
) -> Result<Encoded> {
    let norm = norm.ok_or(Error::MissingNorm)?;
    let mut x = raw_features(g, c, lib)?;
    norm.apply(&mut x);
    let features = match crit {
        None => x,
        Some(bits) => {
            if bits.len() != g.nodes.len() {
                return Err(Error::Dimension(format!(
                    "{} critical labels for {} nodes",
                    bits.len(),
                    g.nodes.len()
                )));
            }
            let mut y = Array2::zeros((g.nodes.len(), FEATURE_DIM + 1));
            y.slice_mut(ndarray::s![.., ..FEATURE_DIM]).assign(&x);
            for (i, &b) in bits.iter().enumerate() {
                y[[i, FEATURE_DIM]] = if b { 1.0 } else { 0.0 };
            }
            y
        }
    };
    Ok(Encoded { features, edges: edge_indices(g)? })
}

pub fn edge_indices(g: &AcceleratorGraph) -> Result<Vec<(usize, usize)>> {
    let topo = g.topology()?;
    let mut edges = Vec::new();
    for (s, succ) in topo.succs.iter().enumerate() {
        for &d in succ {
            edges.push((s, d));
        }
    }
    Ok(edges)
}
