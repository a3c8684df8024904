// SPDX-License-Identifier: Apache-2.0

use num_bigint::BigUint;

use super::{AcceleratorGraph, Configuration};
use crate::error::{Error, Result};
use crate::unit_library::Library;

/// Compatible candidates per approximable node, in graph node order.
///
/// A genome is a vector of indices into `candidates[i]`; candidate lists are
/// in library id order, so index 0 is the exact unit whenever it survived
/// pruning.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignSpace {
    pub node_ids: Vec<String>,
    pub candidates: Vec<Vec<String>>,
}

impl DesignSpace {
    pub fn new(g: &AcceleratorGraph, lib: &Library) -> Result<Self> {
        let mut node_ids = Vec::new();
        let mut candidates = Vec::new();
        for n in &g.nodes {
            let Some(group) = n.group() else { continue };
            let ids: Vec<String> = lib.group(group).iter().map(|c| c.id.clone()).collect();
            if ids.is_empty() {
                return Err(Error::NoCandidates(n.id.clone()));
            }
            node_ids.push(n.id.clone());
            candidates.push(ids);
        }
        Ok(Self { node_ids, candidates })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    /// Number of total configurations, exact.
    pub fn size(&self) -> BigUint {
        self.candidates
            .iter()
            .fold(BigUint::from(1u32), |acc, c| acc * BigUint::from(c.len()))
    }

    pub fn to_config(&self, genome: &[usize]) -> Configuration {
        self.node_ids
            .iter()
            .zip(&self.candidates)
            .zip(genome)
            .map(|((n, cands), &i)| (n.clone(), cands[i].clone()))
            .collect()
    }

    pub fn to_genome(&self, c: &Configuration) -> Result<Vec<usize>> {
        self.node_ids
            .iter()
            .zip(&self.candidates)
            .map(|(n, cands)| {
                let id = c
                    .get(n)
                    .ok_or_else(|| Error::Configuration(format!("node `{n}` is unassigned")))?;
                cands.iter().position(|x| x == id).ok_or_else(|| {
                    Error::Configuration(format!("candidate `{id}` is not compatible with `{n}`"))
                })
            })
            .collect()
    }

    /// Checks that `c` is total and every assignment is compatible.
    pub fn check(&self, c: &Configuration) -> Result<()> {
        self.to_genome(c).map(|_| ())
    }
}
