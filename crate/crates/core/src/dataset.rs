// SPDX-License-Identifier: Apache-2.0

//! Configuration sampling, oracle labeling and train/test splitting.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accel_graph::features::raw_features;
use crate::accel_graph::{canonicalize, AcceleratorGraph, Benchmark, Configuration, DesignSpace, NormStats};
use crate::error::{Error, Result};
use crate::quality_oracle::{Oracle, QualityReport};
use crate::unit_library::{derive_seed, Library};

pub const TRAIN_RATIO: f64 = 0.9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub benchmark: Benchmark,
    pub config: Configuration,
    pub report: QualityReport,
    /// Sampling seed and the draw index that produced this configuration.
    pub seed: u64,
    pub draw: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    pub configs: Vec<Configuration>,
    /// Draw index of each configuration.
    pub draws: Vec<usize>,
    /// True when the draw budget ran out before `n` distinct configurations.
    pub exhausted: bool,
}

/// Draws up to `n` distinct canonical configurations, each gene uniform over
/// its node's candidates, with a budget of `10 n` draws.
pub fn sample_configs(g: &AcceleratorGraph, space: &DesignSpace, n: usize, seed: u64) -> Result<Sampled> {
    if n == 0 {
        return Err(Error::Dataset("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut configs = Vec::with_capacity(n);
    let mut draws = Vec::with_capacity(n);
    let budget = 10 * n;
    let mut draw = 0;
    while configs.len() < n && draw < budget {
        let genome: Vec<usize> = space.candidates.iter().map(|c| rng.gen_range(0..c.len())).collect();
        let c = canonicalize(g, &space.to_config(&genome));
        if seen.insert(c.clone()) {
            configs.push(c);
            draws.push(draw);
        }
        draw += 1;
    }
    let exhausted = configs.len() < n;
    if exhausted {
        warn!("draw budget exhausted: {} of {n} distinct configurations", configs.len());
    }
    Ok(Sampled { configs, draws, exhausted })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Labeled {
    pub samples: Vec<Sample>,
    /// Index into the input list and error message of each failed evaluation.
    pub failures: Vec<(usize, String)>,
}

/// Evaluates every configuration with the oracle on `workers` threads.
/// Output order follows input order for any worker count.
pub fn label(oracle: &Oracle, sampled: &Sampled, seed: u64, workers: usize) -> Result<Labeled> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Dataset(format!("thread pool: {e}")))?;
    let results: Vec<Result<QualityReport>> =
        pool.install(|| sampled.configs.par_iter().map(|c| oracle.evaluate(c)).collect());
    let mut samples = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(report) => samples.push(Sample {
                benchmark: oracle.benchmark,
                config: sampled.configs[i].clone(),
                report,
                seed,
                draw: sampled.draws[i],
            }),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    Ok(Labeled { samples, failures })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitDataset {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub norm: NormStats,
}

/// Number of training samples: `floor(ratio * n)`.
pub fn train_count(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64) + 1e-9).floor() as usize
}

/// Seeded shuffle, then the first `floor(ratio * n)` samples train. Feature
/// normalization is fitted on the training part only.
pub fn split(
    samples: &[Sample],
    ratio: f64,
    seed: u64,
    g: &AcceleratorGraph,
    lib: &Library,
) -> Result<SplitDataset> {
    if samples.len() < 10 {
        return Err(Error::Dataset(format!("{} samples; at least 10 are needed", samples.len())));
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = train_count(samples.len(), ratio);
    let train: Vec<Sample> = order[..cut].iter().map(|&i| samples[i].clone()).collect();
    let test: Vec<Sample> = order[cut..].iter().map(|&i| samples[i].clone()).collect();
    let norm = fit_norm(&train, g, lib)?;
    Ok(SplitDataset { train, test, norm })
}

pub fn fit_norm(train: &[Sample], g: &AcceleratorGraph, lib: &Library) -> Result<NormStats> {
    let rows = train
        .iter()
        .map(|s| raw_features(g, &s.config, lib))
        .collect::<Result<Vec<_>>>()?;
    NormStats::fit(&rows)
}

/// Seed used by [`split`] when the dataset seed is `seed`.
pub fn split_seed(seed: u64) -> u64 {
    derive_seed(seed, "split")
}

/// First line of every dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub benchmark: Benchmark,
    pub simplified: bool,
    pub library_path: String,
    pub library_hash: String,
    pub requested: usize,
    pub seed: u64,
    pub exhausted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: DatasetHeader,
}

pub fn write_jsonl(path: &Path, header: &DatasetHeader, samples: &[Sample]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut out, &HeaderLine { header: header.clone() })?;
    out.write_all(b"\n")?;
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<(DatasetHeader, Vec<Sample>)> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut lines = file.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Dataset(format!("{} is empty", path.display())))??;
    let header: HeaderLine = serde_json::from_str(&first)
        .map_err(|e| Error::Dataset(format!("bad header in {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        samples.push(serde_json::from_str(&line)?);
    }
    Ok((header.header, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel_graph::{load_benchmark, simplify};
    use crate::quality_oracle::ImageSet;
    use crate::unit_library::{GroupKey, LibraryMetadata, Scheme, UnitCandidate};

    fn small_lib() -> Library {
        let mut cands = vec![];
        for g in [GroupKey::add(8), GroupKey::add(12), GroupKey::sub(10)] {
            cands.push(UnitCandidate::exact(g));
            for k in 1..=3 {
                cands.push(UnitCandidate::new(g, Scheme::Truncated, k));
            }
        }
        Library::new(
            LibraryMetadata {
                seed: 0,
                input_distribution: "uniform".into(),
                exhaustive_limit: 0,
                sample_count: 0,
            },
            cands,
        )
        .unwrap()
    }

    #[test]
    fn single_point_space() {
        let g = load_benchmark(Benchmark::Sobel);
        let lib = small_lib().restrict(&small_lib().candidates.iter().filter(|c| c.is_exact()).map(|c| c.id.clone()).collect());
        let space = DesignSpace::new(&g, &lib).unwrap();
        let s = sample_configs(&g, &space, 1, 3).unwrap();
        assert_eq!(s.configs.len(), 1);
        assert!(!s.exhausted);
        let s = sample_configs(&g, &space, 5, 3).unwrap();
        assert_eq!(s.configs.len(), 1);
        assert!(s.exhausted);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = load_benchmark(Benchmark::Sobel);
        let space = DesignSpace::new(&g, &small_lib()).unwrap();
        let a = sample_configs(&g, &space, 50, 11).unwrap();
        let b = sample_configs(&g, &space, 50, 11).unwrap();
        assert_eq!(a, b);
        let distinct: BTreeSet<_> = a.configs.iter().collect();
        assert_eq!(distinct.len(), 50);
    }

    #[test]
    fn labels_do_not_depend_on_workers() {
        let lib = small_lib();
        let g = simplify(&load_benchmark(Benchmark::Sobel));
        let oracle = Oracle::new(Benchmark::Sobel, g.clone(), lib, ImageSet::bundled()).unwrap();
        let s = sample_configs(&g, oracle.space(), 12, 5).unwrap();
        let one = label(&oracle, &s, 5, 1).unwrap();
        let many = label(&oracle, &s, 5, 8).unwrap();
        assert_eq!(one, many);
        assert!(one.failures.is_empty());
    }

    #[test]
    fn split_sizes_and_determinism() {
        assert_eq!(train_count(100, 0.9), 90);
        assert_eq!(train_count(101, 0.9), 90);
        let lib = small_lib();
        let g = load_benchmark(Benchmark::Sobel);
        let oracle = Oracle::new(Benchmark::Sobel, g.clone(), lib.clone(), ImageSet::bundled()).unwrap();
        let s = sample_configs(&g, oracle.space(), 20, 1).unwrap();
        let l = label(&oracle, &s, 1, 1).unwrap();
        let a = split(&l.samples, 0.9, 4, &g, &lib).unwrap();
        let b = split(&l.samples, 0.9, 4, &g, &lib).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.train.len(), a.test.len()), (18, 2));
        assert_eq!(a.norm, fit_norm(&a.train, &g, &lib).unwrap());
        assert!(split(&l.samples[..9], 0.9, 4, &g, &lib).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let lib = small_lib();
        let g = load_benchmark(Benchmark::Sobel);
        let oracle = Oracle::new(Benchmark::Sobel, g.clone(), lib, ImageSet::bundled()).unwrap();
        let s = sample_configs(&g, oracle.space(), 3, 9).unwrap();
        let l = label(&oracle, &s, 9, 1).unwrap();
        let header = DatasetHeader {
            benchmark: Benchmark::Sobel,
            simplified: false,
            library_path: "lib.json".into(),
            library_hash: "00".into(),
            requested: 3,
            seed: 9,
            exhausted: false,
            part: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_jsonl(&path, &header, &l.samples).unwrap();
        let (h, samples) = read_jsonl(&path).unwrap();
        assert_eq!(h, header);
        assert_eq!(samples, l.samples);
    }
}
