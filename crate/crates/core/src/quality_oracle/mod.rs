// SPDX-License-Identifier: Apache-2.0

//! Ground-truth evaluation of configured accelerators.
//!
//! Evaluation canonicalizes the configuration first: members of an orbit are
//! interchangeable placements, and the oracle always simulates and times the
//! sorted placement. Orbit-permuted configurations therefore get identical
//! reports.

pub mod images;
pub mod simulate;
pub mod ssim;
pub mod timing;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::accel_graph::{canonicalize, AcceleratorGraph, Benchmark, Configuration, DesignSpace, Topology};
use crate::error::Result;
use crate::unit_library::Library;

pub use images::{Image, ImageSet};
pub use simulate::{reference, simulate};
pub use ssim::{mean_ssim, ssim};
pub use timing::{longest_path, ppa_of, PpaReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub area: f64,
    pub power: f64,
    pub latency: f64,
    pub ssim: f64,
    /// Node id to 0/1 on-critical-path flag.
    pub critical: BTreeMap<String, u8>,
}

impl QualityReport {
    /// Critical flags in the node order of `g`; nodes missing from the map are 0.
    pub fn critical_bits(&self, g: &AcceleratorGraph) -> Vec<bool> {
        g.nodes
            .iter()
            .map(|n| self.critical.get(&n.id).copied().unwrap_or(0) == 1)
            .collect()
    }

    /// `[area, power, latency, ssim]`.
    pub fn targets(&self) -> [f64; 4] {
        [self.area, self.power, self.latency, self.ssim]
    }
}

/// Benchmark, graph, library and image set bundled with the cached reference
/// outputs.
#[derive(Clone, Debug)]
pub struct Oracle {
    pub benchmark: Benchmark,
    pub graph: AcceleratorGraph,
    pub library: Library,
    pub images: ImageSet,
    space: DesignSpace,
    topology: Topology,
    reference: Vec<Image>,
    sqrt_tables: simulate::SqrtTables,
}

impl Oracle {
    pub fn new(benchmark: Benchmark, graph: AcceleratorGraph, library: Library, images: ImageSet) -> Result<Self> {
        graph.validate()?;
        let topology = graph.topology()?;
        let space = DesignSpace::new(&graph, &library)?;
        let reference = simulate::reference(benchmark, &images.images);
        let sqrt_tables = match benchmark {
            Benchmark::Kmeans => simulate::SqrtTables::for_library(&library),
            _ => simulate::SqrtTables::default(),
        };
        Ok(Self { benchmark, graph, library, images, space, topology, reference, sqrt_tables })
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn ppa(&self, c: &Configuration) -> Result<PpaReport> {
        let c = canonicalize(&self.graph, c);
        self.space.check(&c)?;
        timing::ppa_with_topology(&self.graph, &self.topology, &c, &self.library)
    }

    pub fn evaluate(&self, c: &Configuration) -> Result<QualityReport> {
        let c = canonicalize(&self.graph, c);
        self.space.check(&c)?;
        let ppa = timing::ppa_with_topology(&self.graph, &self.topology, &c, &self.library)?;
        let outs = simulate::simulate_with(self.benchmark, &c, &self.library, &self.images.images, &self.sqrt_tables)?;
        let ssim = mean_ssim(&outs, &self.reference)?;
        let critical = self
            .graph
            .nodes
            .iter()
            .zip(&ppa.critical)
            .map(|(n, &b)| (n.id.clone(), b as u8))
            .collect();
        Ok(QualityReport {
            area: ppa.area,
            power: ppa.power,
            latency: ppa.latency,
            ssim,
            critical,
        })
    }
}

/// One-shot evaluation; prefer [`Oracle`] when labeling many configurations.
pub fn evaluate(
    benchmark: Benchmark,
    graph: &AcceleratorGraph,
    c: &Configuration,
    library: &Library,
    images: &ImageSet,
) -> Result<QualityReport> {
    Oracle::new(benchmark, graph.clone(), library.clone(), images.clone())?.evaluate(c)
}
