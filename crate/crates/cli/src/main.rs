// SPDX-License-Identifier: Apache-2.0

//! `axsel` command-line driver. Stages exchange data only through files.

mod manifest;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use axsel::accel_graph::{load_benchmark, simplify, AcceleratorGraph, Benchmark, Configuration, DesignSpace};
use axsel::dataset::{
    fit_norm, label, read_jsonl, sample_configs, split, split_seed, write_jsonl, DatasetHeader, Sample, SplitDataset,
    TRAIN_RATIO,
};
use axsel::dse::{
    run_dse, verify, Constraints, DseConfig, Engine, Evaluator, Objective, OracleEvaluator, SurrogateEvaluator,
};
use axsel::pruning::{prune_library, DEFAULT_THETA};
use axsel::quality_oracle::{ImageSet, Oracle, QualityReport};
use axsel::surrogate::{train, train_forest, ForestConfig, ForestModel, GnnConfig, ModelKind, SurrogateModel};
use axsel::unit_library::{build_library, Library, LibrarySpec};

use manifest::Recorder;

#[derive(Parser)]
#[command(name = "axsel", version, about = "Approximate accelerator design-space exploration")]
struct Cli {
    /// Base seed; falls back to APPROXPILOT_SEED, then 0.
    #[arg(long, global = true, env = "APPROXPILOT_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads for labeling, prediction and verification.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum GraphKind {
    Naive,
    Simplified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Stage {
    /// Two-stage GNN.
    Both,
    /// Single-stage GNN ablation.
    Single,
    /// Random-forest baseline.
    Forest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum EvaluatorKind {
    Model,
    Oracle,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
enum Command {
    /// Build and characterize the arithmetic unit library.
    Characterize {
        /// Library spec JSON; the built-in spec when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Remove invalid and redundant candidates.
    Prune {
        #[arg(long)]
        library: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Export a benchmark graph.
    Graph {
        #[arg(long)]
        benchmark: String,
        #[arg(long)]
        simplified: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample, label and split a dataset.
    Dataset {
        #[arg(long)]
        benchmark: String,
        #[arg(long)]
        library: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = GraphKind::Simplified)]
        graph: GraphKind,
        /// Writes `<stem>.train.jsonl`, `<stem>.test.jsonl` and `norm.json`
        /// next to this file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a surrogate on a training split.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Defaults to the library recorded in the dataset header.
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Stage::Both)]
        stage: Stage,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        trees: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
    },
    /// Explore the design space and verify the frontier with the oracle.
    Dse {
        #[arg(long)]
        benchmark: String,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        library: PathBuf,
        #[arg(long, default_value = "area,ssim")]
        objectives: String,
        #[arg(long)]
        min_ssim: Option<f64>,
        #[arg(long)]
        max_area: Option<f64>,
        #[arg(long)]
        max_power: Option<f64>,
        #[arg(long)]
        max_latency: Option<f64>,
        #[arg(long, default_value = "nsga3")]
        engine: String,
        #[arg(long, default_value_t = 100)]
        generations: usize,
        #[arg(long, default_value_t = 100)]
        pop_size: usize,
        #[arg(long, default_value_t = 0.9)]
        crossover_rate: f64,
        /// Per-gene mutation probability; 1 / genome length when omitted.
        #[arg(long)]
        mutation_rate: Option<f64>,
        /// Drives the search with the model, or directly with the oracle.
        #[arg(long, value_enum, default_value_t = EvaluatorKind::Model)]
        evaluator: EvaluatorKind,
        /// Frontier CSV; the history goes to `<stem>.history.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge frontier CSVs and metric JSONs into tidy tables.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

/// A trained checkpoint of either model family.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Gnn(SurrogateModel),
    Forest(ForestModel),
}

impl ModelFile {
    fn node_ids(&self, g: &AcceleratorGraph) -> Vec<String> {
        match self {
            ModelFile::Gnn(m) => m.node_ids.clone(),
            ModelFile::Forest(_) => g.nodes.iter().map(|n| n.id.clone()).collect(),
        }
    }
}

struct ForestEvaluator<'a> {
    model: &'a ForestModel,
    graph: &'a AcceleratorGraph,
    library: &'a Library,
}

impl Evaluator for ForestEvaluator<'_> {
    fn evaluate(&self, configs: &[Configuration]) -> axsel::error::Result<Vec<QualityReport>> {
        configs
            .iter()
            .map(|c| {
                let [area, power, latency, ssim] = self.model.predict(self.graph, self.library, c)?;
                Ok(QualityReport { area, power, latency, ssim, critical: BTreeMap::new() })
            })
            .collect()
    }
}

fn graph_of(b: Benchmark, kind: GraphKind) -> AcceleratorGraph {
    let g = load_benchmark(b);
    match kind {
        GraphKind::Naive => g,
        GraphKind::Simplified => simplify(&g),
    }
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn read_library(rec: &mut Recorder, path: &Path) -> Result<Library> {
    Library::from_json(&rec.read(path)?).with_context(|| format!("{} is not a library", path.display()))
}

fn read_dataset(rec: &mut Recorder, path: &Path) -> Result<(DatasetHeader, Vec<Sample>)> {
    rec.read(path)?;
    read_jsonl(path).with_context(|| format!("reading dataset {}", path.display()))
}

/// The library named on the command line, or the one recorded in the header,
/// checked against the header's hash.
fn dataset_library(rec: &mut Recorder, header: &DatasetHeader, flag: Option<&Path>) -> Result<Library> {
    let path = flag.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&header.library_path));
    let lib = read_library(rec, &path)?;
    if lib.content_hash() != header.library_hash {
        bail!("library {} does not match the dataset (hash {} vs {})", path.display(), lib.content_hash(), header.library_hash);
    }
    Ok(lib)
}

fn dataset_graph(header: &DatasetHeader) -> AcceleratorGraph {
    graph_of(header.benchmark, if header.simplified { GraphKind::Simplified } else { GraphKind::Naive })
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    let workers = cli.workers.max(1);
    let mut rec = Recorder::new(command_name(&cli.command), &cli.command);
    rec.seed("seed", seed);
    match &cli.command {
        Command::Characterize { spec, out } => {
            let spec = match spec {
                Some(p) => LibrarySpec::from_json(&rec.read(p)?)?,
                None => LibrarySpec::default_spec(),
            };
            let lib = build_library(&spec, seed)?;
            info!("characterized {} candidates", lib.len());
            rec.write(out, &(lib.to_json()? + "\n"))?;
        }
        Command::Prune { library, theta, out, report } => {
            let lib = read_library(&mut rec, library)?;
            let (pruned, rep) = prune_library(&lib, *theta)?;
            info!("kept {} of {} candidates", pruned.len(), lib.len());
            rec.write(out, &(pruned.to_json()? + "\n"))?;
            if let Some(r) = report {
                rec.write(r, &json(&rep)?)?;
            }
        }
        Command::Graph { benchmark, simplified, out } => {
            let b: Benchmark = benchmark.parse()?;
            let kind = if *simplified { GraphKind::Simplified } else { GraphKind::Naive };
            rec.write(out, &(graph_of(b, kind).to_json()? + "\n"))?;
        }
        Command::Dataset { benchmark, library, n, graph, out } => {
            let b: Benchmark = benchmark.parse()?;
            let lib = read_library(&mut rec, library)?;
            let g = graph_of(b, *graph);
            let oracle = Oracle::new(b, g.clone(), lib.clone(), ImageSet::bundled())?;
            let sampled = sample_configs(&g, oracle.space(), *n, seed)?;
            let labeled = label(&oracle, &sampled, seed, workers)?;
            for (i, e) in &labeled.failures {
                log::warn!("configuration {i} failed: {e}");
            }
            let mut header = DatasetHeader {
                benchmark: b,
                simplified: *graph == GraphKind::Simplified,
                library_path: library.display().to_string(),
                library_hash: lib.content_hash(),
                requested: *n,
                seed,
                exhausted: sampled.exhausted,
                part: None,
            };
            let s = split_seed(seed);
            rec.seed("split", s);
            let parts = split(&labeled.samples, TRAIN_RATIO, s, &g, &lib)?;
            write_jsonl(out, &header, &labeled.samples)?;
            rec.output(out);
            for (part, samples) in [("train", &parts.train), ("test", &parts.test)] {
                header.part = Some(part.to_string());
                let p = with_suffix(out, &format!(".{part}.jsonl"));
                write_jsonl(&p, &header, samples)?;
                rec.output(&p);
            }
            rec.write(&out.with_file_name("norm.json"), &json(&parts.norm)?)?;
            info!("{} samples, {} train / {} test", labeled.samples.len(), parts.train.len(), parts.test.len());
        }
        Command::Train { data, library, stage, epochs, layers, hidden, learning_rate, batch_size, trees, out } => {
            let (header, samples) = read_dataset(&mut rec, data)?;
            let lib = dataset_library(&mut rec, &header, library.as_deref())?;
            let g = dataset_graph(&header);
            let model = match stage {
                Stage::Forest => {
                    let mut cfg = ForestConfig { seed, ..ForestConfig::default() };
                    if let Some(t) = trees {
                        cfg.trees = *t;
                    }
                    ModelFile::Forest(train_forest(&samples, &g, &lib, &cfg)?)
                }
                Stage::Both | Stage::Single => {
                    let mut cfg = GnnConfig { seed, ..GnnConfig::desk() };
                    if let Some(v) = epochs {
                        cfg.epochs = *v;
                    }
                    if let Some(v) = layers {
                        cfg.layers = *v;
                    }
                    if let Some(v) = hidden {
                        cfg.hidden = *v;
                    }
                    if let Some(v) = learning_rate {
                        cfg.learning_rate = *v;
                    }
                    if let Some(v) = batch_size {
                        cfg.batch_size = *v;
                    }
                    let norm = fit_norm(&samples, &g, &lib)?;
                    let part = SplitDataset { train: samples, test: Vec::new(), norm };
                    let kind = if *stage == Stage::Both { ModelKind::TwoStage } else { ModelKind::SingleStage };
                    ModelFile::Gnn(train(&part, &g, &lib, &cfg, kind)?)
                }
            };
            rec.write(out, &(serde_json::to_string(&model)? + "\n"))?;
        }
        Command::Eval { model, data, library, report } => {
            let model: ModelFile = serde_json::from_str(&rec.read(model)?).context("not a model checkpoint")?;
            let (header, samples) = read_dataset(&mut rec, data)?;
            let lib = dataset_library(&mut rec, &header, library.as_deref())?;
            let g = dataset_graph(&header);
            let r = match &model {
                ModelFile::Gnn(m) => {
                    m.validate()?;
                    m.evaluate(&g, &lib, &samples)?
                }
                ModelFile::Forest(m) => m.evaluate(&g, &lib, &samples)?,
            };
            rec.write(report, &json(&r)?)?;
        }
        Command::Dse {
            benchmark,
            model,
            library,
            objectives,
            min_ssim,
            max_area,
            max_power,
            max_latency,
            engine,
            generations,
            pop_size,
            crossover_rate,
            mutation_rate,
            evaluator,
            out,
        } => {
            let b: Benchmark = benchmark.parse()?;
            let model: ModelFile = serde_json::from_str(&rec.read(model)?).context("not a model checkpoint")?;
            let lib = read_library(&mut rec, library)?;
            // The graph variant is the one whose node list the model was trained on.
            let g = [GraphKind::Simplified, GraphKind::Naive]
                .into_iter()
                .map(|k| graph_of(b, k))
                .find(|g| {
                    let ids: Vec<String> = g.nodes.iter().map(|n| n.id.clone()).collect();
                    model.node_ids(g) == ids
                })
                .context("the model was not trained on this benchmark")?;
            let cfg = DseConfig {
                engine: engine.parse::<Engine>()?,
                objectives: Objective::parse_list(objectives)?,
                constraints: Constraints {
                    min_ssim: *min_ssim,
                    max_area: *max_area,
                    max_power: *max_power,
                    max_latency: *max_latency,
                },
                generations: *generations,
                pop_size: *pop_size,
                seed,
                crossover_rate: *crossover_rate,
                mutation_rate: *mutation_rate,
                workers,
                ..DseConfig::default()
            };
            let space = DesignSpace::new(&g, &lib)?;
            let oracle = Oracle::new(b, g.clone(), lib.clone(), ImageSet::bundled())?;
            let dse_run = match &model {
                _ if *evaluator == EvaluatorKind::Oracle => {
                    run_dse(&g, &space, &OracleEvaluator { oracle: &oracle, workers }, &cfg)?
                }
                ModelFile::Gnn(m) => {
                    m.validate()?;
                    let eval = SurrogateEvaluator { model: m, graph: &g, library: &lib, workers };
                    run_dse(&g, &space, &eval, &cfg)?
                }
                ModelFile::Forest(m) => run_dse(&g, &space, &ForestEvaluator { model: m, graph: &g, library: &lib }, &cfg)?,
            };
            let frontier = verify(&dse_run, &oracle, workers)?;
            if let Some(d) = &frontier.diagnostic {
                log::warn!("{d}");
            }
            info!("{} evaluations, {} frontier points", dse_run.evaluations, frontier.points.len());
            rec.write(out, &frontier.to_csv())?;
            #[derive(Serialize)]
            struct History<'a> {
                config: &'a DseConfig,
                evaluations: usize,
                oracle_evaluations: usize,
                diagnostic: Option<&'a String>,
                generations: &'a [axsel::dse::GenerationRecord],
                frontier: &'a [axsel::dse::FrontierPoint],
            }
            let history = History {
                config: &cfg,
                evaluations: dse_run.evaluations,
                oracle_evaluations: frontier.oracle_evaluations,
                diagnostic: frontier.diagnostic.as_ref().or(dse_run.diagnostic.as_ref()),
                generations: &dse_run.history,
                frontier: &frontier.points,
            };
            rec.write(&with_suffix(out, ".history.json"), &json(&history)?)?;
        }
        Command::Report { inputs, out_dir } => {
            let mut frontiers = Vec::new();
            let mut metrics = Vec::new();
            for p in inputs {
                let text = rec.read(p)?;
                match report::classify(p, text)? {
                    report::Input::Frontier(t) => frontiers.push((p.display().to_string(), t)),
                    report::Input::Metrics(m) => metrics.push((p.display().to_string(), m)),
                }
            }
            if !frontiers.is_empty() {
                rec.write(&out_dir.join("frontier_points.csv"), &report::frontier_table(&frontiers)?)?;
            }
            if !metrics.is_empty() {
                rec.write(&out_dir.join("metrics.csv"), &report::metrics_table(&metrics))?;
            }
        }
    }
    rec.finish()?;
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Characterize { .. } => "characterize",
        Command::Prune { .. } => "prune",
        Command::Graph { .. } => "graph",
        Command::Dataset { .. } => "dataset",
        Command::Train { .. } => "train",
        Command::Eval { .. } => "eval",
        Command::Dse { .. } => "dse",
        Command::Report { .. } => "report",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
