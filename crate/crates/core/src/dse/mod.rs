// SPDX-License-Identifier: Apache-2.0

//! Multi-objective search over configurations.
//!
//! Engines evaluate candidates through an [`Evaluator`], normally the trained
//! surrogate, and keep every feasible non-dominated point in a
//! [`ParetoArchive`]. [`verify`] re-evaluates the archive and the final
//! population with the oracle and re-filters on the verified values; only
//! verified points are exported.
//!
//! All objectives are minimized; SSIM enters as `-ssim`.

pub mod hypervolume;
pub mod nsga3;
pub mod sort;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::accel_graph::{canonicalize, AcceleratorGraph, Configuration, DesignSpace};
use crate::error::{Error, Result};
use crate::quality_oracle::{Oracle, QualityReport};
use crate::surrogate::SurrogateModel;
use crate::unit_library::Library;

pub use hypervolume::hypervolume;
pub use sort::{constrained_dominates, crowding_distance, dominates, non_dominated_sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Area,
    Power,
    Latency,
    Ssim,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Area => "area",
            Objective::Power => "power",
            Objective::Latency => "latency",
            Objective::Ssim => "ssim",
        }
    }

    /// Minimization value.
    pub fn value(self, r: &QualityReport) -> f64 {
        match self {
            Objective::Area => r.area,
            Objective::Power => r.power,
            Objective::Latency => r.latency,
            Objective::Ssim => -r.ssim,
        }
    }

    /// Reported value: the metric itself, with SSIM not negated.
    pub fn metric(self, r: &QualityReport) -> f64 {
        match self {
            Objective::Ssim => r.ssim,
            o => o.value(r),
        }
    }

    /// Parses a comma-separated list such as `area,ssim`.
    pub fn parse_list(text: &str) -> Result<Vec<Objective>> {
        let objs = text
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<Objective>>>()?;
        let distinct: BTreeSet<_> = objs.iter().collect();
        if objs.is_empty() || distinct.len() != objs.len() {
            return Err(Error::Dse(format!("objective list `{text}` is empty or repeats an entry")));
        }
        Ok(objs)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "area" => Ok(Objective::Area),
            "power" => Ok(Objective::Power),
            "latency" => Ok(Objective::Latency),
            "ssim" => Ok(Objective::Ssim),
            other => Err(Error::Dse(format!("unknown objective `{other}`"))),
        }
    }
}

pub fn objective_vector(objectives: &[Objective], r: &QualityReport) -> Vec<f64> {
    objectives.iter().map(|o| o.value(r)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub min_ssim: Option<f64>,
    pub max_area: Option<f64>,
    pub max_power: Option<f64>,
    pub max_latency: Option<f64>,
}

impl Constraints {
    /// Total violation, each bound's excess relative to the bound (SSIM
    /// absolute); zero means feasible.
    pub fn violation(&self, r: &QualityReport) -> f64 {
        let over = |v: f64, bound: Option<f64>| match bound {
            Some(b) if v > b => (v - b) / b.abs().max(1e-12),
            _ => 0.0,
        };
        let under = match self.min_ssim {
            Some(b) if r.ssim < b => b - r.ssim,
            _ => 0.0,
        };
        under + over(r.area, self.max_area) + over(r.power, self.max_power) + over(r.latency, self.max_latency)
    }

    pub fn feasible(&self, r: &QualityReport) -> bool {
        self.violation(r) == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Nsga2,
    Nsga3,
    Hillclimb,
    Random,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nsga2" => Ok(Engine::Nsga2),
            "nsga3" => Ok(Engine::Nsga3),
            "hillclimb" => Ok(Engine::Hillclimb),
            "random" => Ok(Engine::Random),
            other => Err(Error::Dse(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DseConfig {
    pub engine: Engine,
    pub objectives: Vec<Objective>,
    pub constraints: Constraints,
    pub generations: usize,
    pub pop_size: usize,
    pub seed: u64,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / genome length`.
    pub mutation_rate: Option<f64>,
    /// Generations with an unchanged parent population before a restart.
    pub stagnation_window: usize,
    pub reseed_fraction: f64,
    pub workers: usize,
}

impl Default for DseConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Nsga3,
            objectives: vec![Objective::Area, Objective::Ssim],
            constraints: Constraints::default(),
            generations: 100,
            pop_size: 100,
            seed: 0,
            crossover_rate: 0.9,
            mutation_rate: None,
            stagnation_window: 5,
            reseed_fraction: 0.5,
            workers: 1,
        }
    }
}

impl DseConfig {
    /// Evaluation budget shared by all engines: `pop_size * (generations + 1)`.
    pub fn budget(&self) -> usize {
        self.pop_size * (self.generations + 1)
    }

    fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::Dse("population size must be at least 2".into()));
        }
        if self.objectives.is_empty() {
            return Err(Error::Dse("at least one objective is required".into()));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.reseed_fraction) {
            return Err(Error::Dse("rates must lie in [0, 1]".into()));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::Dse(format!("mutation rate {m} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Batch evaluation of configurations.
pub trait Evaluator: Sync {
    fn evaluate(&self, configs: &[Configuration]) -> Result<Vec<QualityReport>>;
}

pub struct SurrogateEvaluator<'a> {
    pub model: &'a SurrogateModel,
    pub graph: &'a AcceleratorGraph,
    pub library: &'a Library,
    pub workers: usize,
}

impl Evaluator for SurrogateEvaluator<'_> {
    fn evaluate(&self, configs: &[Configuration]) -> Result<Vec<QualityReport>> {
        self.model.predict_batch(self.graph, self.library, configs, self.workers)
    }
}

pub struct OracleEvaluator<'a> {
    pub oracle: &'a Oracle,
    pub workers: usize,
}

impl Evaluator for OracleEvaluator<'_> {
    fn evaluate(&self, configs: &[Configuration]) -> Result<Vec<QualityReport>> {
        let run = || configs.par_iter().map(|c| self.oracle.evaluate(c)).collect::<Result<Vec<_>>>();
        if self.workers <= 1 {
            return configs.iter().map(|c| self.oracle.evaluate(c)).collect();
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Dse(format!("thread pool: {e}")))?
            .install(run)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Vec<usize>,
    pub predicted: Option<QualityReport>,
    pub verified: Option<QualityReport>,
    pub rank: usize,
    pub crowding: f64,
    /// Generation in which this genome was first evaluated.
    pub generation: usize,
}

impl Individual {
    pub fn new(genome: Vec<usize>, generation: usize) -> Self {
        Self { genome, predicted: None, verified: None, rank: 0, crowding: 0.0, generation }
    }

    pub fn report(&self) -> Result<&QualityReport> {
        self.predicted
            .as_ref()
            .ok_or_else(|| Error::Dse("individual has not been evaluated".into()))
    }

    pub fn objectives(&self, objectives: &[Objective]) -> Result<Vec<f64>> {
        Ok(objective_vector(objectives, self.report()?))
    }
}

/// Non-dominated sorting of evaluated individuals.
pub fn sort_individuals(pop: &[Individual], objectives: &[Objective]) -> Result<Vec<Vec<usize>>> {
    let pts = pop.iter().map(|i| i.objectives(objectives)).collect::<Result<Vec<_>>>()?;
    Ok(non_dominated_sort(&pts))
}

/// Feasible, mutually non-dominated individuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    pub objectives: Vec<Objective>,
    pub members: Vec<Individual>,
}

impl ParetoArchive {
    pub fn new(objectives: Vec<Objective>) -> Self {
        Self { objectives, members: Vec::new() }
    }

    /// Inserts `ind` when it is feasible and no member dominates or equals it
    /// in objective space; evicts members it dominates. Returns whether it
    /// entered.
    pub fn insert(&mut self, ind: &Individual, constraints: &Constraints) -> Result<bool> {
        let r = ind.report()?;
        if !constraints.feasible(r) {
            return Ok(false);
        }
        let v = objective_vector(&self.objectives, r);
        let mut keep = Vec::with_capacity(self.members.len());
        for m in &self.members {
            let mv = objective_vector(&self.objectives, m.report()?);
            if dominates(&mv, &v) || mv == v {
                return Ok(false);
            }
            keep.push(!dominates(&v, &mv));
        }
        let mut k = keep.iter();
        self.members.retain(|_| *k.next().expect("one flag per member"));
        self.members.push(ind.clone());
        debug_assert!(self.is_consistent());
        Ok(true)
    }

    /// No member dominates another.
    pub fn is_consistent(&self) -> bool {
        let vs: Vec<Vec<f64>> = self
            .members
            .iter()
            .filter_map(|m| m.predicted.as_ref().map(|r| objective_vector(&self.objectives, r)))
            .collect();
        vs.iter().all(|a| vs.iter().all(|b| !dominates(a, b)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub evaluations: usize,
    /// Best feasible predicted value of each objective in the parent
    /// population (archive for the non-population engines); `None` when no
    /// member is feasible.
    pub best: BTreeMap<String, Option<f64>>,
    pub archive_size: usize,
    pub restarted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DseRun {
    pub config: DseConfig,
    pub archive: ParetoArchive,
    pub final_population: Vec<Individual>,
    pub history: Vec<GenerationRecord>,
    pub evaluations: usize,
    /// Set when no feasible point was found.
    pub diagnostic: Option<String>,
}

struct Search<'a> {
    g: &'a AcceleratorGraph,
    space: &'a DesignSpace,
    eval: &'a dyn Evaluator,
    cfg: &'a DseConfig,
    rng: ChaCha8Rng,
    cache: HashMap<Vec<usize>, QualityReport>,
    evaluations: usize,
    archive: ParetoArchive,
    history: Vec<GenerationRecord>,
}

impl<'a> Search<'a> {
    fn canonical(&self, genome: &[usize]) -> Vec<usize> {
        let c = canonicalize(self.g, &self.space.to_config(genome));
        self.space.to_genome(&c).expect("canonical configurations stay in the space")
    }

    fn random_genome(&mut self) -> Vec<usize> {
        let g: Vec<usize> = self.space.candidates.iter().map(|c| self.rng.gen_range(0..c.len())).collect();
        self.canonical(&g)
    }

    /// Evaluates and archives; every genome counts against the budget.
    fn evaluate(&mut self, genomes: Vec<Vec<usize>>, generation: usize) -> Result<Vec<Individual>> {
        let missing: Vec<Vec<usize>> = {
            let mut seen = BTreeSet::new();
            genomes
                .iter()
                .filter(|g| !self.cache.contains_key(*g) && seen.insert((*g).clone()))
                .cloned()
                .collect()
        };
        if !missing.is_empty() {
            let configs: Vec<Configuration> = missing.iter().map(|g| self.space.to_config(g)).collect();
            let reports = self.eval.evaluate(&configs)?;
            for (g, r) in missing.into_iter().zip(reports) {
                self.cache.insert(g, r);
            }
        }
        self.evaluations += genomes.len();
        let mut out = Vec::with_capacity(genomes.len());
        for g in genomes {
            let mut ind = Individual::new(g, generation);
            ind.predicted = Some(self.cache[&ind.genome].clone());
            self.archive.insert(&ind, &self.cfg.constraints)?;
            out.push(ind);
        }
        Ok(out)
    }

    fn record(&mut self, generation: usize, members: &[Individual], restarted: bool) {
        let mut best = BTreeMap::new();
        for o in &self.cfg.objectives {
            let v = members
                .iter()
                .filter_map(|m| m.predicted.as_ref())
                .filter(|r| self.cfg.constraints.feasible(r))
                .map(|r| o.value(r))
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
            best.insert(o.as_str().to_string(), v);
        }
        self.history.push(GenerationRecord {
            generation,
            evaluations: self.evaluations,
            best,
            archive_size: self.archive.members.len(),
            restarted,
        });
    }

    fn remaining(&self) -> usize {
        self.cfg.budget().saturating_sub(self.evaluations)
    }
}

/// Survivor selection: `size` members of `pop` in survival order, with rank
/// and crowding filled in. Repeated genomes compete only when there are
/// fewer than `size` distinct ones.
pub fn select(pop: Vec<Individual>, size: usize, cfg: &DseConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Individual>> {
    let mut seen = BTreeSet::new();
    let (unique, repeats): (Vec<Individual>, Vec<Individual>) =
        pop.into_iter().partition(|i| seen.insert(i.genome.clone()));
    if unique.len() >= size || repeats.is_empty() {
        return select_distinct(unique, size, cfg, rng);
    }
    let mut out = select_distinct(unique, size, cfg, rng)?;
    let rest = size - out.len();
    out.extend(select_distinct(repeats, rest, cfg, rng)?);
    Ok(out)
}

fn select_distinct(pop: Vec<Individual>, size: usize, cfg: &DseConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Individual>> {
    let pts = pop.iter().map(|i| i.objectives(&cfg.objectives)).collect::<Result<Vec<_>>>()?;
    let viol: Vec<f64> = pop.iter().map(|i| cfg.constraints.violation(i.predicted.as_ref().expect("evaluated"))).collect();
    let fronts = sort::constrained_sort(&pts, &viol);
    let mut chosen: Vec<usize> = Vec::with_capacity(size);
    let mut rank = vec![0usize; pop.len()];
    let mut crowd = vec![0.0f64; pop.len()];
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            rank[i] = r;
        }
        let fpts: Vec<Vec<f64>> = front.iter().map(|&i| pts[i].clone()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&fpts)) {
            crowd[i] = d;
        }
        if chosen.len() >= size {
            continue;
        }
        if chosen.len() + front.len() <= size {
            chosen.extend(front);
            continue;
        }
        let k = size - chosen.len();
        match cfg.engine {
            Engine::Nsga3 => {
                let m = cfg.objectives.len();
                let refs = nsga3::das_dennis(m, nsga3::divisions(m, size));
                let (picked, _) = nsga3::niche_select(&pts, &chosen, front, k, &refs, rng);
                chosen.extend(picked);
            }
            _ => {
                let mut f = front.clone();
                f.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(a.cmp(&b)));
                chosen.extend(&f[..k]);
            }
        }
    }
    let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
    Ok(chosen
        .into_iter()
        .map(|i| {
            let mut ind = slots[i].take().expect("each index chosen once");
            ind.rank = rank[i];
            ind.crowding = crowd[i];
            ind
        })
        .collect())
}

/// Binary tournament on rank, then crowding (NSGA-II) or a coin flip.
fn tournament<'p>(pop: &'p [Individual], engine: Engine, rng: &mut ChaCha8Rng) -> &'p Individual {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    if a.rank != b.rank {
        return if a.rank < b.rank { a } else { b };
    }
    if engine == Engine::Nsga2 && a.crowding != b.crowding {
        return if a.crowding > b.crowding { a } else { b };
    }
    if rng.gen_bool(0.5) {
        a
    } else {
        b
    }
}

/// `count` offspring by tournament selection, uniform crossover and
/// per-gene resampling mutation. Genomes are canonicalized.
#[allow(clippy::too_many_arguments)]
pub fn evolve(
    parents: &[Individual],
    count: usize,
    g: &AcceleratorGraph,
    space: &DesignSpace,
    engine: Engine,
    crossover_rate: f64,
    mutation_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p1 = tournament(parents, engine, rng).genome.clone();
        let p2 = tournament(parents, engine, rng).genome.clone();
        let (mut c1, mut c2) = (p1.clone(), p2.clone());
        if rng.gen_bool(crossover_rate) {
            for i in 0..p1.len() {
                if rng.gen_bool(0.5) {
                    c1[i] = p2[i];
                    c2[i] = p1[i];
                }
            }
        }
        for c in [&mut c1, &mut c2] {
            for (i, gene) in c.iter_mut().enumerate() {
                if rng.gen_bool(mutation_rate) {
                    *gene = rng.gen_range(0..space.candidates[i].len());
                }
            }
        }
        for c in [c1, c2] {
            if out.len() < count {
                let cfg = canonicalize(g, &space.to_config(&c));
                out.push(space.to_genome(&cfg).expect("canonical configurations stay in the space"));
            }
        }
    }
    out
}

fn population_key(pop: &[Individual]) -> Vec<Vec<usize>> {
    let mut k: Vec<Vec<usize>> = pop.iter().map(|i| i.genome.clone()).collect();
    k.sort();
    k
}

/// Runs the configured engine within the evaluation budget.
pub fn run_dse(g: &AcceleratorGraph, space: &DesignSpace, eval: &dyn Evaluator, cfg: &DseConfig) -> Result<DseRun> {
    cfg.validate()?;
    if space.is_empty() {
        return Err(Error::Dse("the graph has no approximable node".into()));
    }
    let mut s = Search {
        g,
        space,
        eval,
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cache: HashMap::new(),
        evaluations: 0,
        archive: ParetoArchive::new(cfg.objectives.clone()),
        history: Vec::new(),
    };
    let final_population = match cfg.engine {
        Engine::Nsga2 | Engine::Nsga3 => genetic(&mut s)?,
        Engine::Hillclimb => hillclimb(&mut s)?,
        Engine::Random => random_search(&mut s)?,
    };
    let diagnostic = s
        .archive
        .members
        .is_empty()
        .then(|| format!("no feasible configuration found in {} evaluations", s.evaluations));
    Ok(DseRun {
        config: cfg.clone(),
        archive: s.archive,
        final_population,
        history: s.history,
        evaluations: s.evaluations,
        diagnostic,
    })
}

fn genetic(s: &mut Search<'_>) -> Result<Vec<Individual>> {
    let cfg = s.cfg;
    let mutation = cfg.mutation_rate.unwrap_or(1.0 / s.space.len() as f64);
    let init: Vec<Vec<usize>> = (0..cfg.pop_size).map(|_| s.random_genome()).collect();
    let evaluated = s.evaluate(init, 0)?;
    let mut pop = select(evaluated, cfg.pop_size, cfg, &mut s.rng)?;
    s.record(0, &pop, false);
    let mut prev = population_key(&pop);
    let mut unchanged = 0;
    for generation in 1..=cfg.generations {
        let n = cfg.pop_size.min(s.remaining());
        if n == 0 {
            break;
        }
        let kids = evolve(&pop, n, s.g, s.space, cfg.engine, cfg.crossover_rate, mutation, &mut s.rng);
        let mut merged = pop;
        merged.extend(s.evaluate(kids, generation)?);
        pop = select(merged, cfg.pop_size, cfg, &mut s.rng)?;
        let key = population_key(&pop);
        unchanged = if key == prev { unchanged + 1 } else { 0 };
        prev = key;
        let mut restarted = false;
        if unchanged >= cfg.stagnation_window {
            let k = ((cfg.reseed_fraction * cfg.pop_size as f64) as usize).min(s.remaining());
            if k > 0 {
                pop.truncate(cfg.pop_size - k);
                let fresh: Vec<Vec<usize>> = (0..k).map(|_| s.random_genome()).collect();
                pop.extend(s.evaluate(fresh, generation)?);
                pop = select(pop, cfg.pop_size, cfg, &mut s.rng)?;
                prev = population_key(&pop);
                restarted = true;
            }
            unchanged = 0;
        }
        s.record(generation, &pop, restarted);
    }
    Ok(pop)
}

/// Single-trajectory local search over one-gene neighbours. A neighbour is
/// accepted unless the current point constrained-dominates it; after
/// `stagnation_window * genome length` rejections in a row the walk
/// restarts from a random configuration.
fn hillclimb(s: &mut Search<'_>) -> Result<Vec<Individual>> {
    let cfg = s.cfg;
    let mutable: Vec<usize> = (0..s.space.len()).filter(|&i| s.space.candidates[i].len() > 1).collect();
    let first = s.random_genome();
    let mut current = s.evaluate(vec![first], 0)?.remove(0);
    let patience = cfg.stagnation_window * s.space.len();
    let mut rejections = 0;
    let mut next_record = cfg.pop_size;
    let members = s.archive.members.clone();
    s.record(0, &members, false);
    while s.remaining() > 0 {
        let generation = s.evaluations / cfg.pop_size;
        let mut restarted = false;
        let candidate = if mutable.is_empty() || rejections >= patience {
            rejections = 0;
            restarted = true;
            s.random_genome()
        } else {
            let mut g = current.genome.clone();
            let i = mutable[s.rng.gen_range(0..mutable.len())];
            let n = s.space.candidates[i].len();
            let shift = s.rng.gen_range(1..n);
            g[i] = (g[i] + shift) % n;
            s.canonical(&g)
        };
        let ind = s.evaluate(vec![candidate], generation)?.remove(0);
        let cur_r = current.report()?;
        let new_r = ind.report()?;
        let cur_v = objective_vector(&cfg.objectives, cur_r);
        let new_v = objective_vector(&cfg.objectives, new_r);
        let accept = restarted
            || !constrained_dominates(
                &cur_v,
                cfg.constraints.violation(cur_r),
                &new_v,
                cfg.constraints.violation(new_r),
            );
        if accept {
            current = ind;
            if !restarted {
                rejections = 0;
            }
        } else {
            rejections += 1;
        }
        if s.evaluations >= next_record {
            next_record += cfg.pop_size;
            let members = s.archive.members.clone();
            s.record(s.evaluations / cfg.pop_size, &members, restarted);
        }
    }
    Ok(s.archive.members.clone())
}

fn random_search(s: &mut Search<'_>) -> Result<Vec<Individual>> {
    let cfg = s.cfg;
    let mut generation = 0;
    while s.remaining() > 0 {
        let n = cfg.pop_size.min(s.remaining());
        let genomes: Vec<Vec<usize>> = (0..n).map(|_| s.random_genome()).collect();
        s.evaluate(genomes, generation)?;
        let members = s.archive.members.clone();
        s.record(generation, &members, false);
        generation += 1;
    }
    Ok(s.archive.members.clone())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub config_hash: String,
    pub config: Configuration,
    pub verified: QualityReport,
    pub predicted: QualityReport,
    pub generation: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub objectives: Vec<Objective>,
    pub points: Vec<FrontierPoint>,
    pub oracle_evaluations: usize,
    pub diagnostic: Option<String>,
}

/// First 16 hex digits of the SHA-256 of the canonical configuration JSON.
pub fn config_hash(c: &Configuration) -> String {
    let text = serde_json::to_string(c).expect("configurations serialize");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Oracle re-evaluation of the archive and final population, then the
/// feasible non-dominated subset on verified values. Points with equal
/// verified objectives are reported once.
pub fn verify(run: &DseRun, oracle: &Oracle, workers: usize) -> Result<Frontier> {
    let cfg = &run.config;
    let mut seen = BTreeSet::new();
    let mut cands: Vec<&Individual> = Vec::new();
    for ind in run.archive.members.iter().chain(&run.final_population) {
        if seen.insert(ind.genome.clone()) {
            cands.push(ind);
        }
    }
    let space = oracle.space();
    let configs: Vec<Configuration> = cands.iter().map(|i| space.to_config(&i.genome)).collect();
    let reports = OracleEvaluator { oracle, workers }.evaluate(&configs)?;
    let oracle_evaluations = configs.len();
    let mut pts: Vec<FrontierPoint> = Vec::new();
    for ((ind, c), r) in cands.iter().zip(configs).zip(reports) {
        if !cfg.constraints.feasible(&r) {
            continue;
        }
        pts.push(FrontierPoint {
            config_hash: config_hash(&c),
            config: c,
            verified: r,
            predicted: ind.report()?.clone(),
            generation: ind.generation,
        });
    }
    let vs: Vec<Vec<f64>> = pts.iter().map(|p| objective_vector(&cfg.objectives, &p.verified)).collect();
    let front: BTreeSet<usize> = non_dominated_sort(&vs).into_iter().next().unwrap_or_default().into_iter().collect();
    let mut kept: Vec<(Vec<f64>, FrontierPoint)> = pts
        .into_iter()
        .enumerate()
        .filter(|(i, _)| front.contains(i))
        .map(|(i, p)| (vs[i].clone(), p))
        .collect();
    kept.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.generation.cmp(&b.1.generation))
            .then(a.1.config_hash.cmp(&b.1.config_hash))
    });
    kept.dedup_by(|b, a| a.0 == b.0);
    let points: Vec<FrontierPoint> = kept.into_iter().map(|(_, p)| p).collect();
    let diagnostic = points
        .is_empty()
        .then(|| "no verified configuration satisfies the constraints".to_string());
    Ok(Frontier { objectives: cfg.objectives.clone(), points, oracle_evaluations, diagnostic })
}

impl Frontier {
    /// Columns: `config_hash`, verified then predicted value of each
    /// objective, `generation`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("config_hash");
        for o in &self.objectives {
            out.push_str(&format!(",verified_{o}"));
        }
        for o in &self.objectives {
            out.push_str(&format!(",predicted_{o}"));
        }
        out.push_str(",generation\n");
        for p in &self.points {
            out.push_str(&p.config_hash);
            for o in &self.objectives {
                out.push_str(&format!(",{}", o.metric(&p.verified)));
            }
            for o in &self.objectives {
                out.push_str(&format!(",{}", o.metric(&p.predicted)));
            }
            out.push_str(&format!(",{}\n", p.generation));
        }
        out
    }

    /// Verified minimization vectors.
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| objective_vector(&self.objectives, &p.verified)).collect()
    }
}
