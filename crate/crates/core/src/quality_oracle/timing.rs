// SPDX-License-Identifier: Apache-2.0

//! Node-weighted longest path with critical-node labels.

use crate::accel_graph::{AcceleratorGraph, Configuration, Topology};
use crate::error::{Error, Result};
use crate::unit_library::{Library, PpaVector};

#[derive(Clone, Debug, PartialEq)]
pub struct PpaReport {
    pub area: f64,
    pub power: f64,
    pub latency: f64,
    /// One flag per node in graph order.
    pub critical: Vec<bool>,
}

/// Longest source-to-sink path where each node contributes its latency and
/// edges are free. A node is critical iff it lies on at least one maximum path.
///
/// `order` must be a topological order of the graph described by `preds` and
/// `succs`. Sources are nodes without predecessors, sinks nodes without
/// successors.
pub fn longest_path(
    latency: &[f64],
    preds: &[Vec<usize>],
    succs: &[Vec<usize>],
    order: &[usize],
) -> (f64, Vec<bool>) {
    let n = latency.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut arrive = vec![0.0f64; n];
    for &v in order {
        let best = preds[v].iter().map(|&p| arrive[p]).fold(0.0, f64::max);
        arrive[v] = best + latency[v];
    }
    let mut depart = vec![0.0f64; n];
    for &v in order.iter().rev() {
        let best = succs[v].iter().map(|&s| depart[s]).fold(0.0, f64::max);
        depart[v] = best + latency[v];
    }
    let total = (0..n)
        .filter(|&v| succs[v].is_empty())
        .map(|v| arrive[v])
        .fold(0.0, f64::max);
    let tol = 1e-9 * total.abs().max(1.0);
    let critical = (0..n)
        .map(|v| (arrive[v] + depart[v] - latency[v] - total).abs() <= tol)
        .collect();
    (total, critical)
}

/// PPA vector of each node under `c`, in graph order.
pub fn node_ppa(g: &AcceleratorGraph, c: &Configuration, lib: &Library) -> Result<Vec<PpaVector>> {
    g.nodes
        .iter()
        .map(|node| match node.group() {
            None => Ok(node.fixed_ppa.unwrap_or_default()),
            Some(group) => {
                let id = c.get(&node.id).ok_or_else(|| {
                    Error::Configuration(format!("node `{}` is unassigned", node.id))
                })?;
                let cand = lib
                    .get(id)
                    .ok_or_else(|| Error::Configuration(format!("unknown candidate `{id}`")))?;
                if cand.group() != group {
                    return Err(Error::Configuration(format!(
                        "candidate `{id}` does not fit node `{}`",
                        node.id
                    )));
                }
                Ok(cand.ppa)
            }
        })
        .collect()
}

/// Additive area and power plus longest-path latency and critical labels.
pub fn ppa_of(g: &AcceleratorGraph, c: &Configuration, lib: &Library) -> Result<PpaReport> {
    let topo = g.topology()?;
    ppa_with_topology(g, &topo, c, lib)
}

pub fn ppa_with_topology(
    g: &AcceleratorGraph,
    topo: &Topology,
    c: &Configuration,
    lib: &Library,
) -> Result<PpaReport> {
    let ppa = node_ppa(g, c, lib)?;
    let lat: Vec<f64> = ppa.iter().map(|p| p.latency).collect();
    let (latency, critical) = longest_path(&lat, &topo.preds, &topo.succs, &topo.order);
    Ok(PpaReport {
        area: ppa.iter().map(|p| p.area).sum(),
        power: ppa.iter().map(|p| p.power).sum(),
        latency,
        critical,
    })
}
