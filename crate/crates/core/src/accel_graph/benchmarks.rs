// SPDX-License-Identifier: Apache-2.0

//! The three bundled accelerator dataflows.
//!
//! Node ids double as the hooks of the functional models in
//! [`crate::quality_oracle`], so renaming a node here changes both.
//!
//! * Sobel: one vertical-gradient datapath per output pixel. Each of the top
//!   and bottom rows is reduced as `add12(add8(p0, p2), 2 * p1)` and the
//!   magnitude is `sub10(max, min)` of the two row sums, the ordering coming
//!   from a fixed comparator.
//! * Gaussian: 3x3 kernel `[1 2 1; 2 4 2; 1 2 1]`. Nine `mul8x4` products
//!   feed a tree of eight `add16` (corner pair, corner pair, edge pair, edge
//!   pair, then pairwise, then the centre product last), followed by a fixed
//!   rounding adder computing `(sum + 8) >> 4`.
//! * Kmeans: three centroids over three channels per pixel, served by two
//!   physical distance datapaths. Each datapath has three `sub10`
//!   absolute-difference units, three `mul8` squarers, one `add16` used twice
//!   for the three-term sum and one `sqrt18`. Datapath 0 evaluates centroids
//!   0 and 2, datapath 1 centroid 1. The naive graph keeps one memory per
//!   centroid and one divider per centroid update.

use crate::unit_library::{GroupKey, OpKind, PpaVector, Scheme, UnitCandidate};

use super::{AcceleratorGraph, Benchmark, Node, NodeRole};

pub const MEMORY_PPA: PpaVector = PpaVector { area: 96.0, power: 30.0, latency: 3.0 };
pub const CONTROL_PPA: PpaVector = PpaVector { area: 16.0, power: 6.0, latency: 2.0 };
pub const DIVIDER_PPA: PpaVector = PpaVector { area: 120.0, power: 40.0, latency: 18.0 };
pub const IO_PPA: PpaVector = PpaVector { area: 0.0, power: 0.0, latency: 0.0 };

/// The dataflow graph of a benchmark before fixed-node merging.
pub fn load_benchmark(b: Benchmark) -> AcceleratorGraph {
    let g = match b {
        Benchmark::Sobel => sobel(),
        Benchmark::Gaussian => gaussian(),
        Benchmark::Kmeans => kmeans(),
    };
    debug_assert!(g.validate().is_ok());
    g
}

struct Builder {
    name: &'static str,
    nodes: Vec<Node>,
    edges: Vec<(String, String)>,
    orbits: Vec<Vec<String>>,
}

impl Builder {
    fn new(name: &'static str) -> Self {
        Self { name, nodes: Vec::new(), edges: Vec::new(), orbits: Vec::new() }
    }

    fn io(&mut self, id: &str) {
        self.nodes.push(Node::fixed(id, NodeRole::Io, IO_PPA));
    }

    fn memory(&mut self, id: &str) {
        self.nodes.push(Node::fixed(id, NodeRole::FixedMemory, MEMORY_PPA));
    }

    fn control(&mut self, id: &str, ppa: PpaVector) {
        self.nodes.push(Node::fixed(id, NodeRole::FixedControl, ppa));
    }

    fn exact_adder(&mut self, id: &str, width: u32) {
        let ppa = UnitCandidate::new(GroupKey::add(width), Scheme::Exact, 0).ppa;
        self.nodes.push(Node::fixed(id, NodeRole::FixedArith { kind: OpKind::Add, width }, ppa));
    }

    fn unit(&mut self, id: &str, group: GroupKey) {
        self.nodes.push(Node::approximable(id, group));
    }

    fn edge(&mut self, src: &str, dst: &str) {
        self.edges.push((src.to_string(), dst.to_string()));
    }

    fn orbit(&mut self, ids: &[&str]) {
        self.orbits.push(ids.iter().map(|s| s.to_string()).collect());
    }

    fn finish(self) -> AcceleratorGraph {
        AcceleratorGraph {
            name: self.name.to_string(),
            nodes: self.nodes,
            edges: self.edges,
            orbits: self.orbits,
        }
    }
}

fn sobel() -> AcceleratorGraph {
    let mut b = Builder::new("sobel");
    b.io("in");
    b.memory("line_buf");
    b.unit("add8_top", GroupKey::add(8));
    b.unit("add8_bot", GroupKey::add(8));
    b.unit("add12_top", GroupKey::add(12));
    b.unit("add12_bot", GroupKey::add(12));
    b.control("cmp", CONTROL_PPA);
    b.unit("sub10", GroupKey::sub(10));
    b.control("clamp", CONTROL_PPA);
    b.io("out");

    b.edge("in", "line_buf");
    for row in ["top", "bot"] {
        let a8 = format!("add8_{row}");
        let a12 = format!("add12_{row}");
        b.edge("line_buf", &a8);
        b.edge("line_buf", &a12);
        b.edge(&a8, &a12);
        b.edge(&a12, "cmp");
        b.edge(&a12, "sub10");
    }
    b.edge("cmp", "sub10");
    b.edge("sub10", "clamp");
    b.edge("clamp", "out");
    b.finish()
}

/// Gaussian multiplier ids in row-major kernel order.
pub const GAUSSIAN_MULS: [&str; 9] = [
    "mul_00", "mul_01", "mul_02", "mul_10", "mul_11", "mul_12", "mul_20", "mul_21", "mul_22",
];

fn gaussian() -> AcceleratorGraph {
    let mut b = Builder::new("gaussian");
    b.io("in");
    b.memory("line_buf");
    for id in GAUSSIAN_MULS {
        b.unit(id, GroupKey::mul(8, 4));
    }
    let tree = [
        ("add_l1a", "mul_00", "mul_02"),
        ("add_l1b", "mul_20", "mul_22"),
        ("add_l1c", "mul_01", "mul_21"),
        ("add_l1d", "mul_10", "mul_12"),
        ("add_l2a", "add_l1a", "add_l1b"),
        ("add_l2b", "add_l1c", "add_l1d"),
        ("add_l3", "add_l2a", "add_l2b"),
        ("add_l4", "add_l3", "mul_11"),
    ];
    for (id, _, _) in tree {
        b.unit(id, GroupKey::add(16));
    }
    b.exact_adder("round", 16);
    b.io("out");

    b.edge("in", "line_buf");
    for id in GAUSSIAN_MULS {
        b.edge("line_buf", id);
    }
    for (id, l, r) in tree {
        b.edge(l, id);
        b.edge(r, id);
    }
    b.edge("add_l4", "round");
    b.edge("round", "out");
    b.orbit(&["mul_00", "mul_02", "mul_20", "mul_22"]);
    b.orbit(&["mul_01", "mul_10", "mul_12", "mul_21"]);
    b.finish()
}

pub const KMEANS_DATAPATHS: usize = 2;
pub const KMEANS_CHANNELS: usize = 3;
pub const KMEANS_CENTROIDS: usize = 3;

pub fn kmeans_sub(d: usize, c: usize) -> String {
    format!("sub_d{d}_c{c}")
}

pub fn kmeans_mul(d: usize, c: usize) -> String {
    format!("mul_d{d}_c{c}")
}

pub fn kmeans_add(d: usize) -> String {
    format!("add_d{d}")
}

pub fn kmeans_sqrt(d: usize) -> String {
    format!("sqrt_d{d}")
}

fn kmeans() -> AcceleratorGraph {
    let mut b = Builder::new("kmeans");
    b.io("in");
    b.memory("img_mem");
    for j in 0..KMEANS_CENTROIDS {
        b.memory(&format!("cmem_{j}"));
    }
    for d in 0..KMEANS_DATAPATHS {
        for c in 0..KMEANS_CHANNELS {
            b.unit(&kmeans_sub(d, c), GroupKey::sub(10));
        }
        for c in 0..KMEANS_CHANNELS {
            b.unit(&kmeans_mul(d, c), GroupKey::mul(8, 8));
        }
        b.unit(&kmeans_add(d), GroupKey::add(16));
        b.unit(&kmeans_sqrt(d), GroupKey::sqrt(18));
    }
    b.control("argmin", CONTROL_PPA);
    b.memory("cluster_mem");
    for j in 0..KMEANS_CENTROIDS {
        b.control(&format!("div_{j}"), DIVIDER_PPA);
    }
    b.io("out");

    b.edge("in", "img_mem");
    for j in 0..KMEANS_CENTROIDS {
        b.edge("in", &format!("cmem_{j}"));
    }
    for d in 0..KMEANS_DATAPATHS {
        for c in 0..KMEANS_CHANNELS {
            let sub = kmeans_sub(d, c);
            let mul = kmeans_mul(d, c);
            b.edge("img_mem", &sub);
            for j in 0..KMEANS_CENTROIDS {
                b.edge(&format!("cmem_{j}"), &sub);
            }
            b.edge(&sub, &mul);
            b.edge(&mul, &kmeans_add(d));
        }
        b.edge(&kmeans_add(d), &kmeans_sqrt(d));
        b.edge(&kmeans_sqrt(d), "argmin");
    }
    b.edge("argmin", "cluster_mem");
    for j in 0..KMEANS_CENTROIDS {
        let div = format!("div_{j}");
        b.edge("cluster_mem", &div);
        b.edge("img_mem", &div);
        b.edge(&div, "out");
    }
    for d in 0..KMEANS_DATAPATHS {
        let subs: Vec<String> = (0..KMEANS_CHANNELS).map(|c| kmeans_sub(d, c)).collect();
        let muls: Vec<String> = (0..KMEANS_CHANNELS).map(|c| kmeans_mul(d, c)).collect();
        b.orbit(&subs.iter().map(String::as_str).collect::<Vec<_>>());
        b.orbit(&muls.iter().map(String::as_str).collect::<Vec<_>>());
    }
    b.finish()
}
