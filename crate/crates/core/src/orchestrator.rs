//! Parallel drivers: `P` isolated workers that only exchange solutions at
//! synchronization points.
//!
//! * Annealing: every worker runs an [`AnnealingProcess`] for one exchange
//!   interval, then the global best is broadcast to all workers.
//! * Genetic: every worker evolves its own population one generation at a
//!   time and sends its best members to the next worker of a ring.
//! * Composite: exchange-free annealing seeds the per-worker populations of
//!   the genetic stage.
//!
//! Workers run on the rayon pool but every exchange is rank-ordered, so a
//! result depends only on the instance, the parameters, the master seed and
//! the worker count.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::annealing::{default_max_success, AnnealingParams, AnnealingProcess, Schedule};
use crate::error::{Error, Result};
use crate::genetic::{ga_generation, replace_worst, GeneticParams, Population};
use crate::instance::Instance;
use crate::mapping::{random_mapping, Solution};
use crate::Cost;

/// Solver count used up to this order; larger instances get [`LARGE_SOLVERS`].
const SOLVERS_MATCH_ORDER_UP_TO: usize = 100;
const LARGE_SOLVERS: usize = 125;
const SMALL_ITERATIONS: u64 = 50_000;
const LARGE_ITERATIONS: u64 = 100_000;

/// Per-chain annealing budget: 50 000 moves below 256 vertices, 100 000 from
/// there on (held constant beyond 1024).
pub fn default_total_iterations(n_vertices: usize) -> u64 {
    if n_vertices < 256 {
        SMALL_ITERATIONS
    } else {
        LARGE_ITERATIONS
    }
}

/// Chains per worker: the order itself up to 100 vertices, 125 above.
pub fn default_solvers(n_vertices: usize) -> usize {
    if n_vertices <= SOLVERS_MATCH_ORDER_UP_TO {
        n_vertices.max(1)
    } else {
        LARGE_SOLVERS
    }
}

/// Logical CPU count capped at the instance order.
pub fn default_workers(n_vertices: usize) -> usize {
    let cpus = std::thread::available_parallelism().map_or(1, |c| c.get());
    cpus.min(n_vertices).max(1)
}

/// The three parallel algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Annealing,
    Genetic,
    Composite,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Annealing, Algorithm::Genetic, Algorithm::Composite];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::Annealing => "sa",
            Algorithm::Genetic => "ga",
            Algorithm::Composite => "composite",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sa" => Ok(Algorithm::Annealing),
            "ga" => Ok(Algorithm::Genetic),
            "composite" => Ok(Algorithm::Composite),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm `{other}` (expected sa, ga or composite)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelConfig {
    pub workers: usize,
    pub seed: u64,
}

impl ParallelConfig {
    pub fn new(workers: usize, seed: u64) -> Self {
        Self { workers, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers < 1 {
            return Err(Error::InvalidParameter("workers must be at least 1".into()));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of worker `rank`: the master seed xor a hash of the rank and the
/// algorithm tag.
pub fn worker_seed(master: u64, rank: usize, algorithm: Algorithm) -> u64 {
    let tag = algorithm.tag().bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
    });
    master ^ splitmix64(splitmix64(rank as u64) ^ tag)
}

/// Result of a parallel run together with its progress traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub best: Solution,
    /// Global best objective after every synchronization round (annealing) or
    /// generation (genetic stages).
    pub trace: Vec<Cost>,
    /// Per-worker best objective after every round, before the exchange.
    pub worker_traces: Vec<Vec<Cost>>,
}

/// Lowest objective, lowest index on ties.
fn leader<'a>(candidates: impl IntoIterator<Item = &'a Solution>) -> Option<&'a Solution> {
    let mut best: Option<&Solution> = None;
    for cand in candidates {
        if best.is_none_or(|b| cand.objective < b.objective) {
            best = Some(cand);
        }
    }
    best
}

fn worker_rng(config: &ParallelConfig, rank: usize, algorithm: Algorithm) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(worker_seed(config.seed, rank, algorithm))
}

fn rounds(params: &AnnealingParams) -> u64 {
    params.total_iterations.div_ceil(params.exchange_interval)
}

/// Parallel annealing with periodic broadcast of the global best.
pub fn run_parallel_sa(instance: &Instance, params: &AnnealingParams, config: &ParallelConfig) -> Result<Solution> {
    Ok(run_parallel_sa_traced(instance, params, config)?.best)
}

pub fn run_parallel_sa_traced(
    instance: &Instance,
    params: &AnnealingParams,
    config: &ParallelConfig,
) -> Result<RunOutcome> {
    params.validate()?;
    config.validate()?;
    let budget = params.total_iterations * params.solvers as u64;
    let mut workers = (0..config.workers)
        .map(|rank| {
            let mut rng = worker_rng(config, rank, Algorithm::Annealing);
            AnnealingProcess::new(instance, params, &mut rng, budget)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut trace = Vec::new();
    let mut worker_traces = vec![Vec::new(); config.workers];
    for _ in 0..rounds(params) {
        workers
            .par_iter_mut()
            .for_each(|w| w.run_segment(instance, params.exchange_interval));
        for (wt, w) in worker_traces.iter_mut().zip(&workers) {
            wt.push(w.best().objective);
        }
        let global = leader(workers.iter().map(AnnealingProcess::best))
            .expect("at least one worker")
            .clone();
        for w in &mut workers {
            w.adopt(&global);
        }
        trace.push(global.objective);
        if workers.iter().all(AnnealingProcess::is_done) {
            break;
        }
    }
    let best = leader(workers.iter().map(AnnealingProcess::best))
        .expect("at least one worker")
        .clone();
    Ok(RunOutcome {
        best,
        trace,
        worker_traces,
    })
}

/// Island-model genetic algorithm with ring migration.
pub fn run_parallel_ga(instance: &Instance, params: &GeneticParams, config: &ParallelConfig) -> Result<Solution> {
    Ok(run_parallel_ga_traced(instance, params, config)?.best)
}

pub fn run_parallel_ga_traced(
    instance: &Instance,
    params: &GeneticParams,
    config: &ParallelConfig,
) -> Result<RunOutcome> {
    params.validate_for(instance.n())?;
    config.validate()?;
    let mut islands = (0..config.workers)
        .map(|rank| {
            let mut rng = worker_rng(config, rank, Algorithm::Genetic);
            let pop = crate::genetic::init_population(instance, params.population_size, &mut rng)?;
            Ok((pop, rng))
        })
        .collect::<Result<Vec<_>>>()?;
    evolve_islands(instance, params, &mut islands)
}

/// Runs `params.iterations` generations with ring migration after each one.
fn evolve_islands(
    instance: &Instance,
    params: &GeneticParams,
    islands: &mut [(Population, ChaCha8Rng)],
) -> Result<RunOutcome> {
    let workers = islands.len();
    let mut trace = Vec::new();
    let mut worker_traces = vec![Vec::new(); workers];
    for _ in 0..params.iterations {
        islands
            .par_iter_mut()
            .try_for_each(|(pop, rng)| ga_generation(instance, pop, params, rng))?;
        if params.migrants > 0 {
            let outgoing: Vec<Vec<Solution>> = islands.iter().map(|(p, _)| p.elite(params.migrants)).collect();
            for (rank, (pop, _)) in islands.iter_mut().enumerate() {
                replace_worst(pop, &outgoing[(rank + workers - 1) % workers]);
            }
        }
        for (wt, (pop, _)) in worker_traces.iter_mut().zip(islands.iter()) {
            wt.push(pop.best().objective);
        }
        let global = leader(islands.iter().map(|(p, _)| p.best())).expect("at least one island");
        trace.push(global.objective);
    }
    let best = leader(islands.iter().map(|(p, _)| p.best()))
        .expect("at least one island")
        .clone();
    Ok(RunOutcome {
        best,
        trace,
        worker_traces,
    })
}

/// Exchange-free annealing on one worker, recording `population_size`
/// best-so-far snapshots spread evenly over the run. Missing members are
/// filled with the chains' own best solutions, then with random mappings.
fn seed_population(
    instance: &Instance,
    sa: &AnnealingParams,
    population_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Population> {
    let budget = sa.total_iterations * sa.solvers as u64;
    let mut process = AnnealingProcess::new(instance, sa, rng, budget)?;
    let segments = rounds(sa);
    let pop = population_size as u64;
    let mut members: Vec<Solution> = Vec::with_capacity(population_size);
    let push_distinct = |members: &mut Vec<Solution>, s: &Solution| {
        if members.len() < population_size && !members.iter().any(|m| m.mapping == s.mapping) {
            members.push(s.clone());
        }
    };
    for s in 1..=segments {
        process.run_segment(instance, sa.exchange_interval);
        if s * pop / segments > (s - 1) * pop / segments {
            push_distinct(&mut members, process.best());
        }
    }
    // the final best must be present even if a snapshot slot was skipped
    if !members.iter().any(|m| m.mapping == process.best().mapping) {
        if members.len() == population_size {
            members.pop();
        }
        members.push(process.best().clone());
    }
    for chain in process.chains() {
        push_distinct(&mut members, chain.best());
    }
    let mut attempts = 0;
    while members.len() < population_size {
        let cand = Solution::evaluated_unchecked(instance, random_mapping(instance.n(), rng));
        attempts += 1;
        if attempts > 16 * population_size {
            members.push(cand);
        } else {
            push_distinct(&mut members, &cand);
        }
    }
    Population::new(members)
}

/// Annealing-seeded island genetic algorithm.
pub fn run_composite(
    instance: &Instance,
    sa: &AnnealingParams,
    ga: &GeneticParams,
    config: &ParallelConfig,
) -> Result<Solution> {
    Ok(run_composite_traced(instance, sa, ga, config)?.best)
}

pub fn run_composite_traced(
    instance: &Instance,
    sa: &AnnealingParams,
    ga: &GeneticParams,
    config: &ParallelConfig,
) -> Result<RunOutcome> {
    sa.validate()?;
    ga.validate_for(instance.n())?;
    config.validate()?;
    let mut islands = (0..config.workers)
        .into_par_iter()
        .map(|rank| {
            let mut rng = worker_rng(config, rank, Algorithm::Composite);
            let pop = seed_population(instance, sa, ga.population_size, &mut rng)?;
            Ok((pop, rng))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut outcome = evolve_islands(instance, ga, &mut islands)?;
    if outcome.trace.is_empty() {
        outcome.trace.push(outcome.best.objective);
    }
    Ok(outcome)
}

/// Every tunable accepted by [`RunSetup::set`].
pub const TUNABLES: &[&str] = &[
    "max_neighbors",
    "max_success",
    "schedule",
    "linear_q",
    "t_final",
    "init_mu",
    "init_phi",
    "total_iterations",
    "exchange_interval",
    "solvers",
    "population_size",
    "crossover_prob",
    "mutation_prob",
    "offspring_per_iteration",
    "migrants",
    "ga_iterations",
    "workers",
];

/// Parameters of all three algorithms plus the parallel configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSetup {
    pub annealing: AnnealingParams,
    pub genetic: GeneticParams,
    pub config: ParallelConfig,
    max_success_pinned: bool,
}

impl RunSetup {
    /// Defaults for `instance`, with `workers` capped at the order.
    pub fn for_instance(instance: &Instance, seed: u64) -> Self {
        let n = instance.n();
        Self {
            annealing: AnnealingParams::for_instance(instance),
            genetic: GeneticParams::for_order(n),
            config: ParallelConfig::new(default_workers(n), seed),
            max_success_pinned: false,
        }
    }

    /// Overrides one tunable. `max_success` follows `max_neighbors` until it
    /// is set explicitly.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse `{value}`")))
        }
        let sa = &mut self.annealing;
        let ga = &mut self.genetic;
        match canonical_key(key) {
            "max_neighbors" => {
                sa.max_neighbors = parse(key, value)?;
                if !self.max_success_pinned {
                    sa.max_success = default_max_success(sa.max_neighbors);
                }
            }
            "max_success" => {
                sa.max_success = parse(key, value)?;
                self.max_success_pinned = true;
            }
            "schedule" => sa.schedule = value.trim().parse::<Schedule>()?,
            "linear_q" => sa.linear_q = parse(key, value)?,
            "t_final" => sa.t_final = parse(key, value)?,
            "init_mu" => sa.init_mu = parse(key, value)?,
            "init_phi" => sa.init_phi = parse(key, value)?,
            "total_iterations" => sa.total_iterations = parse(key, value)?,
            "exchange_interval" => sa.exchange_interval = parse(key, value)?,
            "solvers" => sa.solvers = parse(key, value)?,
            "population_size" => ga.population_size = parse(key, value)?,
            "crossover_prob" => ga.crossover_prob = parse(key, value)?,
            "mutation_prob" => ga.mutation_prob = parse(key, value)?,
            "offspring_per_iteration" => ga.offspring_per_iteration = parse(key, value)?,
            "migrants" => ga.migrants = parse(key, value)?,
            "ga_iterations" => ga.iterations = parse(key, value)?,
            "workers" => self.config.workers = parse(key, value)?,
            _ => {
                return Err(Error::UnknownParameter {
                    name: key.to_string(),
                    valid: TUNABLES.join(", "),
                })
            }
        }
        Ok(())
    }

    /// Current value of a tunable, formatted as [`RunSetup::set`] accepts it.
    pub fn get(&self, key: &str) -> Option<String> {
        let sa = &self.annealing;
        let ga = &self.genetic;
        Some(match canonical_key(key) {
            "max_neighbors" => sa.max_neighbors.to_string(),
            "max_success" => sa.max_success.to_string(),
            "schedule" => sa.schedule.to_string(),
            "linear_q" => sa.linear_q.to_string(),
            "t_final" => sa.t_final.to_string(),
            "init_mu" => sa.init_mu.to_string(),
            "init_phi" => sa.init_phi.to_string(),
            "total_iterations" => sa.total_iterations.to_string(),
            "exchange_interval" => sa.exchange_interval.to_string(),
            "solvers" => sa.solvers.to_string(),
            "population_size" => ga.population_size.to_string(),
            "crossover_prob" => ga.crossover_prob.to_string(),
            "mutation_prob" => ga.mutation_prob.to_string(),
            "offspring_per_iteration" => ga.offspring_per_iteration.to_string(),
            "migrants" => ga.migrants.to_string(),
            "ga_iterations" => ga.iterations.to_string(),
            "workers" => self.config.workers.to_string(),
            _ => return None,
        })
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("config line {}: expected `key = value`", idx + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// `key=value` pairs relevant to `algorithm`, `;`-separated.
    pub fn snapshot(&self, algorithm: Algorithm) -> String {
        let sa_keys = &TUNABLES[..10];
        let ga_keys = &TUNABLES[10..16];
        let keys: Vec<&str> = match algorithm {
            Algorithm::Annealing => sa_keys.to_vec(),
            Algorithm::Genetic => ga_keys.to_vec(),
            Algorithm::Composite => sa_keys.iter().chain(ga_keys).copied().collect(),
        };
        keys.iter()
            .chain(std::iter::once(&"workers"))
            .map(|k| format!("{k}={}", self.get(k).unwrap_or_default()))
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn validate_for(&self, instance: &Instance, algorithm: Algorithm) -> Result<()> {
        self.config.validate()?;
        match algorithm {
            Algorithm::Annealing => self.annealing.validate(),
            Algorithm::Genetic => self.genetic.validate_for(instance.n()),
            Algorithm::Composite => {
                self.annealing.validate()?;
                self.genetic.validate_for(instance.n())
            }
        }
    }

    /// Runs `algorithm` with this setup.
    pub fn run(&self, instance: &Instance, algorithm: Algorithm) -> Result<RunOutcome> {
        match algorithm {
            Algorithm::Annealing => run_parallel_sa_traced(instance, &self.annealing, &self.config),
            Algorithm::Genetic => run_parallel_ga_traced(instance, &self.genetic, &self.config),
            Algorithm::Composite => run_composite_traced(instance, &self.annealing, &self.genetic, &self.config),
        }
    }
}

fn canonical_key(key: &str) -> &str {
    match key.trim() {
        "maxNeighbors" | "maxNeighbours" | "max_neighbours" => "max_neighbors",
        "maxSuccess" => "max_success",
        other => other,
    }
}
