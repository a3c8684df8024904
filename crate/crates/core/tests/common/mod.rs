// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use axsel::accel_graph::{load_benchmark, simplify, AcceleratorGraph, Benchmark};
use axsel::quality_oracle::{ImageSet, Oracle};
use axsel::unit_library::{GroupKey, Library, LibraryMetadata, Scheme, UnitCandidate};

/// Exact unit plus truncated k = 1..=depth for every group.
pub fn truncated_library(groups: &[GroupKey], depth: u32) -> Library {
    let mut cands = vec![];
    for &g in groups {
        cands.push(UnitCandidate::exact(g));
        for k in 1..=depth {
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

pub fn sobel_groups() -> Vec<GroupKey> {
    vec![GroupKey::add(8), GroupKey::add(12), GroupKey::sub(10)]
}

pub fn sobel_oracle(depth: u32) -> (AcceleratorGraph, Oracle) {
    let g = simplify(&load_benchmark(Benchmark::Sobel));
    let lib = truncated_library(&sobel_groups(), depth);
    let o = Oracle::new(Benchmark::Sobel, g.clone(), lib, ImageSet::bundled()).unwrap();
    (g, o)
}
