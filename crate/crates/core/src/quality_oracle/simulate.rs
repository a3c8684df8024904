// SPDX-License-Identifier: Apache-2.0

//! Functional models of the bundled benchmarks.
//!
//! Every arithmetic operation of an approximable node goes through the
//! assigned candidate's [`CompiledUnit`]. Fixed logic (comparators, clamps,
//! the rounding adder, centroid division) is exact. Values crossing into a
//! narrower unit are saturated to that unit's input width, so approximate
//! results that overshoot never violate an operand range. Borders use
//! replicate padding and outputs have the input size.

use std::borrow::Cow;
use std::collections::HashMap;

use crate::accel_graph::benchmarks::{
    kmeans_add, kmeans_mul, kmeans_sqrt, kmeans_sub, GAUSSIAN_MULS, KMEANS_CENTROIDS,
    KMEANS_CHANNELS, KMEANS_DATAPATHS,
};
use crate::accel_graph::{Benchmark, Configuration};
use crate::error::{Error, Result};
use crate::unit_library::{CompiledUnit, Library, OpKind};

use super::images::Image;

/// Kernel weights of the Gaussian filter in `GAUSSIAN_MULS` order.
pub const GAUSSIAN_WEIGHTS: [u64; 9] = [1, 2, 1, 2, 4, 2, 1, 2, 1];
/// Lloyd iterations run by the Kmeans model before rendering.
pub const KMEANS_ITERATIONS: usize = 5;
/// Initial value of every channel of each centroid.
pub const KMEANS_INIT: [u64; KMEANS_CENTROIDS] = [32, 128, 224];
/// Physical distance datapath serving each centroid.
pub const KMEANS_DATAPATH_OF: [usize; KMEANS_CENTROIDS] = [0, 1, 0];

#[inline]
fn sat(v: u64, bits: u32) -> u64 {
    v.min((1 << bits) - 1)
}

fn unit(c: &Configuration, lib: &Library, node: &str) -> Result<CompiledUnit> {
    let id = c
        .get(node)
        .ok_or_else(|| Error::Configuration(format!("node `{node}` is unassigned")))?;
    lib.get(id)
        .map(|cand| cand.compile())
        .ok_or_else(|| Error::Configuration(format!("unknown candidate `{id}`")))
}

/// Square-root lookup tables over the 16-bit Kmeans distance range, keyed by
/// candidate id.
#[derive(Clone, Debug, Default)]
pub struct SqrtTables {
    tables: HashMap<String, Vec<u64>>,
}

impl SqrtTables {
    pub fn for_library(lib: &Library) -> Self {
        let tables = lib
            .candidates
            .iter()
            .filter(|c| c.kind == OpKind::Sqrt && c.width_a >= 16)
            .map(|c| (c.id.clone(), sqrt_table(&c.compile())))
            .collect();
        Self { tables }
    }
}

fn sqrt_table(u: &CompiledUnit) -> Vec<u64> {
    (0..1u64 << 16).map(|v| u.apply(v, 0)).collect()
}

/// Runs the benchmark's functional model under configuration `c`.
pub fn simulate(b: Benchmark, c: &Configuration, lib: &Library, images: &[Image]) -> Result<Vec<Image>> {
    simulate_with(b, c, lib, images, &SqrtTables::default())
}

/// As [`simulate`], reusing precomputed square-root tables where available.
pub fn simulate_with(
    b: Benchmark,
    c: &Configuration,
    lib: &Library,
    images: &[Image],
    tables: &SqrtTables,
) -> Result<Vec<Image>> {
    Ok(match b {
        Benchmark::Sobel => {
            let u = SobelUnits {
                add8: [unit(c, lib, "add8_top")?, unit(c, lib, "add8_bot")?],
                add12: [unit(c, lib, "add12_top")?, unit(c, lib, "add12_bot")?],
                sub10: unit(c, lib, "sub10")?,
            };
            images.iter().map(|img| sobel(&u, img)).collect()
        }
        Benchmark::Gaussian => {
            let mut muls = Vec::with_capacity(9);
            for id in GAUSSIAN_MULS {
                muls.push(unit(c, lib, id)?);
            }
            let mut adds = Vec::with_capacity(8);
            for id in GAUSSIAN_ADDS {
                adds.push(unit(c, lib, id)?);
            }
            images.iter().map(|img| gaussian(&muls, &adds, img)).collect()
        }
        Benchmark::Kmeans => {
            let mut dps = Vec::with_capacity(KMEANS_DATAPATHS);
            for d in 0..KMEANS_DATAPATHS {
                let mut sub = Vec::new();
                let mut mul = Vec::new();
                for ch in 0..KMEANS_CHANNELS {
                    sub.push(unit(c, lib, &kmeans_sub(d, ch))?);
                    mul.push(unit(c, lib, &kmeans_mul(d, ch))?);
                }
                let sqrt_node = kmeans_sqrt(d);
                let sqrt = match c.get(&sqrt_node).and_then(|id| tables.tables.get(id)) {
                    Some(t) => Cow::Borrowed(t.as_slice()),
                    None => Cow::Owned(sqrt_table(&unit(c, lib, &sqrt_node)?)),
                };
                dps.push(Datapath { sub, mul, add: unit(c, lib, &kmeans_add(d))?, sqrt });
            }
            images.iter().map(|img| kmeans(&Physical(&dps), img)).collect()
        }
    })
}

/// Bit-exact reference outputs computed with plain integer arithmetic.
pub fn reference(b: Benchmark, images: &[Image]) -> Vec<Image> {
    images
        .iter()
        .map(|img| match b {
            Benchmark::Sobel => sobel_reference(img),
            Benchmark::Gaussian => gaussian_reference(img),
            Benchmark::Kmeans => kmeans(&Exact, img),
        })
        .collect()
}

struct SobelUnits {
    add8: [CompiledUnit; 2],
    add12: [CompiledUnit; 2],
    sub10: CompiledUnit,
}

fn sobel(u: &SobelUnits, img: &Image) -> Image {
    Image::from_fn(img.width, img.height, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let mut rows = [0u64; 2];
        for (r, dy) in [-1isize, 1].into_iter().enumerate() {
            let p = |dx: isize| img.get_clamped(x + dx, y + dy) as u64;
            let pair = u.add8[r].apply(p(-1), p(1));
            rows[r] = sat(u.add12[r].apply(sat(pair, 12), 2 * p(0)), 10);
        }
        let (hi, lo) = (rows[0].max(rows[1]), rows[0].min(rows[1]));
        u.sub10.apply(hi, lo).min(255) as u8
    })
}

fn sobel_reference(img: &Image) -> Image {
    Image::from_fn(img.width, img.height, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let row = |dy: isize| {
            let p = |dx: isize| img.get_clamped(x + dx, y + dy) as i64;
            p(-1) + 2 * p(0) + p(1)
        };
        (row(-1) - row(1)).abs().min(255) as u8
    })
}

const GAUSSIAN_ADDS: [&str; 8] = [
    "add_l1a", "add_l1b", "add_l1c", "add_l1d", "add_l2a", "add_l2b", "add_l3", "add_l4",
];

fn gaussian(muls: &[CompiledUnit], adds: &[CompiledUnit], img: &Image) -> Image {
    Image::from_fn(img.width, img.height, |x, y| {
        let mut prod = [0u64; 9];
        for (i, p) in prod.iter_mut().enumerate() {
            let (dx, dy) = ((i % 3) as isize - 1, (i / 3) as isize - 1);
            let px = img.get_clamped(x as isize + dx, y as isize + dy) as u64;
            *p = sat(muls[i].apply(px, GAUSSIAN_WEIGHTS[i]), 16);
        }
        let add = |k: usize, a: u64, b: u64| sat(adds[k].apply(a, b), 16);
        let l1a = add(0, prod[0], prod[2]);
        let l1b = add(1, prod[6], prod[8]);
        let l1c = add(2, prod[1], prod[7]);
        let l1d = add(3, prod[3], prod[5]);
        let l2a = add(4, l1a, l1b);
        let l2b = add(5, l1c, l1d);
        let l3 = add(6, l2a, l2b);
        let l4 = add(7, l3, prod[4]);
        ((l4 + 8) >> 4).min(255) as u8
    })
}

fn gaussian_reference(img: &Image) -> Image {
    Image::from_fn(img.width, img.height, |x, y| {
        let mut sum = 0u64;
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                let w = [1, 2, 1][(dx + 1) as usize] * [1, 2, 1][(dy + 1) as usize];
                sum += w * img.get_clamped(x as isize + dx, y as isize + dy) as u64;
            }
        }
        ((sum + 8) >> 4).min(255) as u8
    })
}

struct Datapath<'a> {
    sub: Vec<CompiledUnit>,
    mul: Vec<CompiledUnit>,
    add: CompiledUnit,
    sqrt: Cow<'a, [u64]>,
}

/// Distance split into a per-channel term that depends only on an 8-bit
/// pixel value and a centroid, and a combination of the three terms.
trait Distance {
    fn term(&self, centroid: usize, channel: usize, x: u64, c: u64) -> u64;
    fn combine(&self, centroid: usize, terms: [u64; KMEANS_CHANNELS]) -> u64;
}

/// `sqrt(sum_c (|x_c - cen_c|^2 >> 2))` through the physical units; the
/// single adder is used twice.
struct Physical<'a>(&'a [Datapath<'a>]);

impl Distance for Physical<'_> {
    fn term(&self, centroid: usize, ch: usize, x: u64, c: u64) -> u64 {
        let dp = &self.0[KMEANS_DATAPATH_OF[centroid]];
        let diff = dp.sub[ch].apply(x.max(c), x.min(c)).min(255);
        sat(dp.mul[ch].apply(diff, diff) >> 2, 16)
    }

    fn combine(&self, centroid: usize, sq: [u64; KMEANS_CHANNELS]) -> u64 {
        let dp = &self.0[KMEANS_DATAPATH_OF[centroid]];
        let partial = sat(dp.add.apply(sq[0], sq[1]), 16);
        let total = sat(dp.add.apply(partial, sq[2]), 16);
        dp.sqrt[total as usize]
    }
}

struct Exact;

impl Distance for Exact {
    fn term(&self, _: usize, _: usize, x: u64, c: u64) -> u64 {
        let d = x.abs_diff(c);
        (d * d) >> 2
    }

    fn combine(&self, _: usize, sq: [u64; KMEANS_CHANNELS]) -> u64 {
        sq.iter().sum::<u64>().isqrt()
    }
}

/// Lloyd iterations over per-pixel feature vectors (pixel, right neighbour,
/// lower neighbour), then one final assignment rendered as channel 0 of the
/// chosen centroid. Ties go to the lower centroid index; an empty cluster
/// keeps its centroid.
fn kmeans(dist: &impl Distance, img: &Image) -> Image {
    let feats: Vec<[u8; KMEANS_CHANNELS]> = (0..img.height)
        .flat_map(|y| (0..img.width).map(move |x| (x as isize, y as isize)))
        .map(|(x, y)| [img.get_clamped(x, y), img.get_clamped(x + 1, y), img.get_clamped(x, y + 1)])
        .collect();
    let mut cen: [[u64; KMEANS_CHANNELS]; KMEANS_CENTROIDS] =
        KMEANS_INIT.map(|v| [v; KMEANS_CHANNELS]);
    let mut assign = vec![0usize; feats.len()];
    let mut table = vec![[[0u64; 256]; KMEANS_CHANNELS]; KMEANS_CENTROIDS];
    for iter in 0..=KMEANS_ITERATIONS {
        for (j, t) in table.iter_mut().enumerate() {
            for (ch, row) in t.iter_mut().enumerate() {
                for (x, v) in row.iter_mut().enumerate() {
                    *v = dist.term(j, ch, x as u64, cen[j][ch]);
                }
            }
        }
        for (a, f) in assign.iter_mut().zip(&feats) {
            let mut best = (u64::MAX, 0);
            for (j, t) in table.iter().enumerate() {
                let d = dist.combine(j, [t[0][f[0] as usize], t[1][f[1] as usize], t[2][f[2] as usize]]);
                if d < best.0 {
                    best = (d, j);
                }
            }
            *a = best.1;
        }
        if iter == KMEANS_ITERATIONS {
            break;
        }
        let mut sums = [[0u64; KMEANS_CHANNELS]; KMEANS_CENTROIDS];
        let mut counts = [0u64; KMEANS_CENTROIDS];
        for (&a, f) in assign.iter().zip(&feats) {
            counts[a] += 1;
            for ch in 0..KMEANS_CHANNELS {
                sums[a][ch] += f[ch] as u64;
            }
        }
        for j in 0..KMEANS_CENTROIDS {
            if counts[j] > 0 {
                for ch in 0..KMEANS_CHANNELS {
                    cen[j][ch] = sums[j][ch] / counts[j];
                }
            }
        }
    }
    let pixels = assign.iter().map(|&a| cen[a][0] as u8).collect();
    Image { width: img.width, height: img.height, pixels }
}
