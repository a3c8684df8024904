// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use super::{AcceleratorGraph, Node};
use crate::unit_library::PpaVector;

/// Merges fixed nodes that share role, in-neighbor set and out-neighbor set.
///
/// The survivor keeps the id of the first member in node order. Merged nodes
/// are parallel copies, so their areas and powers add and the latency is the
/// maximum; graph-level area, power and longest path are unchanged. Merging
/// repeats until no further pair qualifies.
pub fn simplify(g: &AcceleratorGraph) -> AcceleratorGraph {
    let mut cur = dedup_edges(g.clone());
    loop {
        let Some((keep, merged)) = find_mergeable(&cur) else {
            return cur;
        };
        let keep_id = cur.nodes[keep].id.clone();
        let gone: BTreeSet<String> = merged.iter().map(|&i| cur.nodes[i].id.clone()).collect();
        let mut ppa = cur.nodes[keep].fixed_ppa.unwrap_or_default();
        for &i in &merged {
            let p = cur.nodes[i].fixed_ppa.unwrap_or_default();
            ppa = PpaVector {
                area: ppa.area + p.area,
                power: ppa.power + p.power,
                latency: ppa.latency.max(p.latency),
            };
        }
        cur.nodes[keep].fixed_ppa = Some(ppa);
        cur.nodes.retain(|n: &Node| !gone.contains(&n.id));
        let rename = |id: &String| if gone.contains(id) { keep_id.clone() } else { id.clone() };
        cur.edges = cur.edges.iter().map(|(s, d)| (rename(s), rename(d))).collect();
        cur = dedup_edges(cur);
    }
}

fn dedup_edges(mut g: AcceleratorGraph) -> AcceleratorGraph {
    let mut seen = BTreeSet::new();
    g.edges.retain(|e| seen.insert(e.clone()));
    g
}

/// First fixed node with at least one identical sibling, plus those siblings.
fn find_mergeable(g: &AcceleratorGraph) -> Option<(usize, Vec<usize>)> {
    let sig = |i: usize| {
        let id = &g.nodes[i].id;
        let ins: BTreeSet<&str> =
            g.edges.iter().filter(|(_, d)| d == id).map(|(s, _)| s.as_str()).collect();
        let outs: BTreeSet<&str> =
            g.edges.iter().filter(|(s, _)| s == id).map(|(_, d)| d.as_str()).collect();
        (ins, outs)
    };
    let fixed: Vec<usize> =
        (0..g.nodes.len()).filter(|&i| !g.nodes[i].role.is_approximable()).collect();
    let sigs: Vec<_> = fixed.iter().map(|&i| sig(i)).collect();
    for (a, &i) in fixed.iter().enumerate() {
        let twins: Vec<usize> = fixed
            .iter()
            .enumerate()
            .skip(a + 1)
            .filter(|&(b, &j)| g.nodes[j].role == g.nodes[i].role && sigs[b] == sigs[a])
            .map(|(_, &j)| j)
            .collect();
        if !twins.is_empty() {
            return Some((i, twins));
        }
    }
    None
}
