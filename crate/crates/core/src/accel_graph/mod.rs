// SPDX-License-Identifier: Apache-2.0

//! Accelerator dataflow IR.
//!
//! Nodes are physical units. Approximable arithmetic nodes receive a library
//! candidate through a [`Configuration`]; fixed nodes (memories, control,
//! exact arithmetic, I/O) carry a constant PPA vector.

pub mod benchmarks;
pub mod features;
mod simplify;
mod space;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::unit_library::{GroupKey, OpKind, PpaVector};

pub use benchmarks::load_benchmark;
pub use features::{encode_features, ComputeType, Encoded, NormStats, FEATURE_DIM};
pub use simplify::simplify;
pub use space::DesignSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    Sobel,
    Gaussian,
    Kmeans,
}

impl Benchmark {
    pub const ALL: [Benchmark; 3] = [Benchmark::Sobel, Benchmark::Gaussian, Benchmark::Kmeans];

    pub fn as_str(self) -> &'static str {
        match self {
            Benchmark::Sobel => "sobel",
            Benchmark::Gaussian => "gaussian",
            Benchmark::Kmeans => "kmeans",
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sobel" => Ok(Benchmark::Sobel),
            "gaussian" => Ok(Benchmark::Gaussian),
            "kmeans" => Ok(Benchmark::Kmeans),
            _ => Err(Error::UnknownBenchmark(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum NodeRole {
    ApproximableArith { group: GroupKey },
    FixedMemory,
    FixedControl,
    FixedArith { kind: OpKind, width: u32 },
    Io,
}

impl NodeRole {
    pub fn is_approximable(&self) -> bool {
        matches!(self, NodeRole::ApproximableArith { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(flatten)]
    pub role: NodeRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_ppa: Option<PpaVector>,
}

impl Node {
    pub fn approximable(id: &str, group: GroupKey) -> Self {
        Self {
            id: id.to_string(),
            role: NodeRole::ApproximableArith { group },
            fixed_ppa: None,
        }
    }

    pub fn fixed(id: &str, role: NodeRole, ppa: PpaVector) -> Self {
        debug_assert!(!role.is_approximable());
        Self {
            id: id.to_string(),
            role,
            fixed_ppa: Some(ppa),
        }
    }

    pub fn group(&self) -> Option<GroupKey> {
        match self.role {
            NodeRole::ApproximableArith { group } => Some(group),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceleratorGraph {
    pub name: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub orbits: Vec<Vec<String>>,
}

/// Index-based adjacency of a validated DAG.
#[derive(Clone, Debug)]
pub struct Topology {
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
    /// Nodes in a topological order (stable: ties broken by node index).
    pub order: Vec<usize>,
    pub index: HashMap<String, usize>,
}

impl AcceleratorGraph {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn approximable_ids(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.role.is_approximable())
            .map(|n| n.id.as_str())
            .collect()
    }

    pub fn approximable_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.role.is_approximable()).count()
    }

    /// Approximable node count per group name.
    pub fn inventory(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for n in &self.nodes {
            if let Some(g) = n.group() {
                *out.entry(g.to_string()).or_insert(0) += 1;
            }
        }
        out
    }

    /// Builds adjacency lists and a topological order, rejecting unknown
    /// endpoints and cycles.
    pub fn topology(&self) -> Result<Topology> {
        let mut index = HashMap::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(Error::Structure(format!("duplicate node id `{}`", n.id)));
            }
        }
        let n = self.nodes.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for (src, dst) in &self.edges {
            let s = *index
                .get(src)
                .ok_or_else(|| Error::Structure(format!("edge from unknown node `{src}`")))?;
            let d = *index
                .get(dst)
                .ok_or_else(|| Error::Structure(format!("edge to unknown node `{dst}`")))?;
            if !succs[s].contains(&d) {
                succs[s].push(d);
                preds[d].push(s);
            }
        }
        let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &succs[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Structure("cycle detected".into()));
        }
        Ok(Topology { preds, succs, order, index })
    }

    /// Checks the structural invariants: DAG, every approximable node on a
    /// source-to-sink path through an I/O node at each end, and orbit members
    /// sharing one group.
    pub fn validate(&self) -> Result<()> {
        let topo = self.topology()?;
        let n = self.nodes.len();
        let is_io = |i: usize| self.nodes[i].role == NodeRole::Io;
        let mut from_src = vec![false; n];
        for &v in &topo.order {
            from_src[v] = (topo.preds[v].is_empty() && is_io(v))
                || topo.preds[v].iter().any(|&p| from_src[p]);
        }
        let mut to_sink = vec![false; n];
        for &v in topo.order.iter().rev() {
            to_sink[v] = (topo.succs[v].is_empty() && is_io(v))
                || topo.succs[v].iter().any(|&s| to_sink[s]);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.role.is_approximable() {
                if node.fixed_ppa.is_some() {
                    return Err(Error::Structure(format!("approximable node `{}` has fixed PPA", node.id)));
                }
                if !(from_src[i] && to_sink[i]) {
                    return Err(Error::Structure(format!(
                        "approximable node `{}` is not on an io path",
                        node.id
                    )));
                }
            } else if node.fixed_ppa.is_none() {
                return Err(Error::Structure(format!("fixed node `{}` lacks a PPA vector", node.id)));
            }
        }
        for orbit in &self.orbits {
            let mut groups = BTreeSet::new();
            for id in orbit {
                let node = topo
                    .index
                    .get(id)
                    .map(|&i| &self.nodes[i])
                    .ok_or_else(|| Error::Structure(format!("orbit names unknown node `{id}`")))?;
                groups.insert(
                    node.group()
                        .ok_or_else(|| Error::Structure(format!("orbit member `{id}` is fixed")))?,
                );
            }
            if groups.len() > 1 {
                return Err(Error::Structure("orbit mixes unit groups".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: AcceleratorGraph = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }
}

/// Assignment of candidate ids to approximable node ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    pub assignment: BTreeMap<String, String>,
}

impl Configuration {
    pub fn get(&self, node: &str) -> Option<&str> {
        self.assignment.get(node).map(String::as_str)
    }

    pub fn set(&mut self, node: &str, candidate: &str) {
        self.assignment.insert(node.to_string(), candidate.to_string());
    }
}

impl FromIterator<(String, String)> for Configuration {
    fn from_iter<T: IntoIterator<Item = (String, String)>>(iter: T) -> Self {
        Self { assignment: iter.into_iter().collect() }
    }
}

/// Sorts the candidate ids assigned within each orbit and reassigns them to
/// the orbit members in declaration order.
pub fn canonicalize(g: &AcceleratorGraph, c: &Configuration) -> Configuration {
    let mut out = c.clone();
    for orbit in &g.orbits {
        let mut ids: Vec<&String> = orbit.iter().filter_map(|n| c.assignment.get(n)).collect();
        if ids.len() != orbit.len() {
            continue;
        }
        ids.sort();
        for (node, cand) in orbit.iter().zip(ids) {
            out.assignment.insert(node.clone(), cand.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orbit_graph() -> AcceleratorGraph {
        let g = GroupKey::mul(8, 4);
        let ppa = PpaVector::default();
        let mut nodes = vec![Node::fixed("in", NodeRole::Io, ppa)];
        for i in 1..=4 {
            nodes.push(Node::approximable(&format!("n{i}"), g));
        }
        nodes.push(Node::fixed("out", NodeRole::Io, ppa));
        let mut edges = Vec::new();
        for i in 1..=4 {
            edges.push(("in".to_string(), format!("n{i}")));
            edges.push((format!("n{i}"), "out".to_string()));
        }
        AcceleratorGraph {
            name: "toy".into(),
            nodes,
            edges,
            orbits: vec![(1..=4).map(|i| format!("n{i}")).collect()],
        }
    }

    fn config(ids: [&str; 4]) -> Configuration {
        ids.iter()
            .enumerate()
            .map(|(i, c)| (format!("n{}", i + 1), c.to_string()))
            .collect()
    }

    #[test]
    fn canonicalize_sorts_orbit() {
        let g = orbit_graph();
        let c = canonicalize(&g, &config(["B", "A", "A", "B"]));
        assert_eq!(c, config(["A", "A", "B", "B"]));
        assert_eq!(canonicalize(&g, &c), c);
    }

    #[test]
    fn canonicalize_is_permutation_invariant() {
        let g = orbit_graph();
        let a = canonicalize(&g, &config(["C", "A", "D", "B"]));
        let b = canonicalize(&g, &config(["A", "C", "D", "B"]));
        assert_eq!(a, b);
    }

    #[test]
    fn cycle_is_rejected() {
        let mut g = orbit_graph();
        g.edges.push(("out".into(), "in".into()));
        assert!(matches!(g.topology(), Err(Error::Structure(_))));
    }

    #[test]
    fn dangling_approximable_node_fails_validation() {
        let mut g = orbit_graph();
        g.edges.retain(|(s, _)| s != "n1");
        assert!(g.validate().is_err());
        assert!(orbit_graph().validate().is_ok());
    }

    #[test]
    fn benchmark_names_parse() {
        assert_eq!("Kmeans".parse::<Benchmark>().unwrap(), Benchmark::Kmeans);
        assert!(matches!("fft".parse::<Benchmark>(), Err(Error::UnknownBenchmark(_))));
    }
}
