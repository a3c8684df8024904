// SPDX-License-Identifier: Apache-2.0

//! Candidate pruning and design-space cardinality.
//!
//! Each candidate is viewed as the lower-is-better vector
//! `[mse, area, power, latency]`. Invalid pruning keeps the Pareto-efficient
//! subset of a group; redundant pruning then thins near-duplicates under a
//! weighted Euclidean distance.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::accel_graph::{AcceleratorGraph, DesignSpace};
use crate::error::{Error, Result};
use crate::unit_library::{Library, UnitCandidate};

pub const DEFAULT_THETA: f64 = 0.05;

pub fn vector(c: &UnitCandidate) -> [f64; 4] {
    [c.errors.mse, c.ppa.area, c.ppa.power, c.ppa.latency]
}

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64; 4], b: &[f64; 4]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    DominatedBy,
    DuplicateOf,
    RedundantWith,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Removal {
    pub id: String,
    pub reason: Reason,
    pub by: String,
}

/// Removes every candidate that another candidate of the group dominates.
/// Among identical vectors only the smallest id survives. Output is in id
/// order.
pub fn prune_invalid(group: &[UnitCandidate]) -> (Vec<UnitCandidate>, Vec<Removal>) {
    let mut sorted: Vec<&UnitCandidate> = group.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let vs: Vec<[f64; 4]> = sorted.iter().map(|c| vector(c)).collect();
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (i, c) in sorted.iter().enumerate() {
        let dom = (0..sorted.len()).find(|&j| dominates(&vs[j], &vs[i]));
        let dup = (0..i).find(|&j| vs[j] == vs[i]);
        match (dom, dup) {
            (Some(j), _) => removed.push(Removal {
                id: c.id.clone(),
                reason: Reason::DominatedBy,
                by: sorted[j].id.clone(),
            }),
            (None, Some(j)) => removed.push(Removal {
                id: c.id.clone(),
                reason: Reason::DuplicateOf,
                by: sorted[j].id.clone(),
            }),
            (None, None) => kept.push((*c).clone()),
        }
    }
    (kept, removed)
}

/// Reciprocal of each dimension's range within the group (1 for a flat dimension).
pub fn default_rho(group: &[UnitCandidate]) -> [f64; 4] {
    let mut rho = [1.0; 4];
    for (l, r) in rho.iter_mut().enumerate() {
        let vals = group.iter().map(|c| vector(c)[l]);
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi > lo {
            *r = 1.0 / (hi - lo);
        }
    }
    rho
}

pub fn distance(a: &[f64; 4], b: &[f64; 4], rho: &[f64; 4]) -> f64 {
    (0..4).map(|l| (rho[l] * (a[l] - b[l])).powi(2)).sum::<f64>().sqrt()
}

/// Greedy thinning in id order: a candidate is dropped when a previously
/// retained one lies within `theta`.
pub fn prune_redundant(
    group: &[UnitCandidate],
    theta: f64,
    rho: &[f64; 4],
) -> Result<(Vec<UnitCandidate>, Vec<Removal>)> {
    if theta < 0.0 || theta.is_nan() {
        return Err(Error::NegativeTheta(theta));
    }
    let mut sorted: Vec<&UnitCandidate> = group.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut kept: Vec<&UnitCandidate> = Vec::new();
    let mut removed = Vec::new();
    for c in sorted {
        let v = vector(c);
        match kept.iter().find(|k| distance(&vector(k), &v, rho) <= theta) {
            Some(k) => removed.push(Removal {
                id: c.id.clone(),
                reason: Reason::RedundantWith,
                by: k.id.clone(),
            }),
            None => kept.push(c),
        }
    }
    Ok((kept.into_iter().cloned().collect(), removed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub before: usize,
    pub after_invalid: usize,
    pub after_redundant: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub theta: f64,
    pub groups: Vec<GroupSummary>,
    pub removed: Vec<Removal>,
}

/// Invalid then redundant pruning of every group, with `rho` defaulted from
/// each invalid-pruned group.
pub fn prune_library(lib: &Library, theta: f64) -> Result<(Library, PruneReport)> {
    if theta < 0.0 || theta.is_nan() {
        return Err(Error::NegativeTheta(theta));
    }
    let mut keep = BTreeSet::new();
    let mut groups = Vec::new();
    let mut removed = Vec::new();
    for key in lib.groups() {
        let members: Vec<UnitCandidate> = lib.group(key).into_iter().cloned().collect();
        let (valid, mut r1) = prune_invalid(&members);
        let rho = default_rho(&valid);
        let (thin, mut r2) = prune_redundant(&valid, theta, &rho)?;
        groups.push(GroupSummary {
            group: key.to_string(),
            before: members.len(),
            after_invalid: valid.len(),
            after_redundant: thin.len(),
        });
        keep.extend(thin.into_iter().map(|c| c.id));
        removed.append(&mut r1);
        removed.append(&mut r2);
    }
    Ok((lib.restrict(&keep), PruneReport { theta, groups, removed }))
}

/// Product over approximable nodes of the number of compatible candidates.
pub fn design_space_size(g: &AcceleratorGraph, lib: &Library) -> Result<BigUint> {
    Ok(DesignSpace::new(g, lib)?.size())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit_library::{GroupKey, Scheme};

    fn cand(id: &str, v: [f64; 4]) -> UnitCandidate {
        let mut c = UnitCandidate::new(GroupKey::add(8), Scheme::Truncated, 1);
        c.id = id.to_string();
        c.errors.mse = v[0];
        c.ppa.area = v[1];
        c.ppa.power = v[2];
        c.ppa.latency = v[3];
        c
    }

    fn ids(cs: &[UnitCandidate]) -> Vec<&str> {
        cs.iter().map(|c| c.id.as_str()).collect()
    }

    #[test]
    fn dominated_candidate_removed() {
        let g = [cand("a", [4.0, 10.0, 2.0, 8.0]), cand("b", [4.0, 12.0, 3.0, 9.0])];
        let (kept, removed) = prune_invalid(&g);
        assert_eq!(ids(&kept), ["a"]);
        assert_eq!(removed[0].reason, Reason::DominatedBy);
    }

    #[test]
    fn identical_vectors_keep_smallest_id() {
        let g = [cand("z", [1.0, 2.0, 3.0, 4.0]), cand("m", [1.0, 2.0, 3.0, 4.0])];
        let (kept, _) = prune_invalid(&g);
        assert_eq!(ids(&kept), ["m"]);
    }

    #[test]
    fn theta_extremes() {
        let g = [
            cand("a", [0.0, 1.0, 1.0, 1.0]),
            cand("b", [1.0, 0.5, 1.0, 1.0]),
            cand("c", [1.0, 0.5, 1.0, 1.0]),
            cand("d", [2.0, 0.1, 0.2, 0.3]),
        ];
        let rho = default_rho(&g);
        let (kept, _) = prune_redundant(&g, 0.0, &rho).unwrap();
        assert_eq!(ids(&kept), ["a", "b", "d"]);
        let (kept, _) = prune_redundant(&g, f64::INFINITY, &rho).unwrap();
        assert_eq!(ids(&kept), ["a"]);
        assert!(matches!(prune_redundant(&g, -1.0, &rho), Err(Error::NegativeTheta(_))));
    }

    #[test]
    fn empty_graph_has_one_configuration() {
        let g = AcceleratorGraph { name: "empty".into(), nodes: vec![], edges: vec![], orbits: vec![] };
        let lib = Library::new(
            crate::unit_library::LibraryMetadata {
                seed: 0,
                input_distribution: "uniform".into(),
                exhaustive_limit: 0,
                sample_count: 0,
            },
            vec![],
        )
        .unwrap();
        assert_eq!(design_space_size(&g, &lib).unwrap(), BigUint::from(1u32));
    }
}
