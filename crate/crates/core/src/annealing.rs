//! Simulated annealing over swap moves.
//!
//! A chain examines up to `max_neighbors` random swaps per temperature level,
//! cools early once `max_success` moves were accepted, and stops when its
//! move budget is spent, the temperature reaches `t_final`, or
//! [`STALL_LEVELS`] consecutive levels accept nothing. Chains are resumable so
//! that a process can run them in segments and exchange solutions between
//! segments.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mapping::{mean_random_cost, random_mapping, swap_delta_unchecked, Solution};
use crate::orchestrator::{default_solvers, default_total_iterations};
use crate::Cost;

pub const DEFAULT_MAX_NEIGHBORS: usize = 50;
pub const DEFAULT_EXCHANGE_INTERVAL: u64 = 100;
pub const DEFAULT_T_FINAL: f64 = 1e-3;
/// Default final temperature relative to the starting temperature of an
/// average random mapping.
pub const DEFAULT_T_FINAL_RATIO: f64 = 1e-2;
pub const DEFAULT_INIT_MU: f64 = 0.3;
pub const DEFAULT_INIT_PHI: f64 = 0.3;
pub const DEFAULT_LINEAR_Q: f64 = 0.95;
/// Consecutive temperature levels without an accepted move before a chain stops.
pub const STALL_LEVELS: u32 = 50;

/// Temperature decrease function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// `T <- q * T`
    Linear,
    /// `T <- T / (1 + beta * T)`
    #[default]
    Cauchy,
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Linear => "linear",
            Schedule::Cauchy => "cauchy",
        })
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "geometric" => Ok(Schedule::Linear),
            "cauchy" | "lundy-mees" => Ok(Schedule::Cauchy),
            other => Err(Error::InvalidParameter(format!(
                "unknown schedule `{other}` (expected linear or cauchy)"
            ))),
        }
    }
}

/// Parameters of the annealing algorithm.
///
/// `total_iterations` is the move budget of one chain and `exchange_interval`
/// the number of consecutive moves a chain makes between two exchanges.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealingParams {
    pub max_neighbors: usize,
    pub max_success: usize,
    pub schedule: Schedule,
    pub linear_q: f64,
    pub t_final: f64,
    pub init_mu: f64,
    pub init_phi: f64,
    pub total_iterations: u64,
    pub exchange_interval: u64,
    pub solvers: usize,
}

impl AnnealingParams {
    /// Defaults for an instance of order `n`.
    pub fn for_order(n: usize) -> Self {
        Self {
            max_neighbors: DEFAULT_MAX_NEIGHBORS,
            max_success: default_max_success(DEFAULT_MAX_NEIGHBORS),
            schedule: Schedule::Cauchy,
            linear_q: DEFAULT_LINEAR_Q,
            t_final: DEFAULT_T_FINAL,
            init_mu: DEFAULT_INIT_MU,
            init_phi: DEFAULT_INIT_PHI,
            total_iterations: default_total_iterations(n),
            exchange_interval: DEFAULT_EXCHANGE_INTERVAL,
            solvers: default_solvers(n),
        }
    }

    /// Defaults for `instance`, with `t_final` scaled to its cost range.
    pub fn for_instance(instance: &Instance) -> Self {
        let base = Self::for_order(instance.n());
        let typical = base.init_mu * mean_random_cost(instance) / -base.init_phi.ln();
        Self {
            t_final: (DEFAULT_T_FINAL_RATIO * typical).max(DEFAULT_T_FINAL),
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.max_neighbors < 1 {
            return bad("max_neighbors must be at least 1".into());
        }
        if self.max_success < 1 || self.max_success > self.max_neighbors {
            return bad(format!(
                "max_success must be in 1..={}, found {}",
                self.max_neighbors, self.max_success
            ));
        }
        if !(self.linear_q > 0.0 && self.linear_q < 1.0) {
            return bad(format!("linear_q must be in (0, 1), found {}", self.linear_q));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, found {}", self.t_final));
        }
        if !(self.init_mu > 0.0 && self.init_mu.is_finite()) {
            return bad(format!("init_mu must be positive, found {}", self.init_mu));
        }
        if !(self.init_phi > 0.0 && self.init_phi < 1.0) {
            return bad(format!("init_phi must be in (0, 1), found {}", self.init_phi));
        }
        if self.exchange_interval < 1 || self.total_iterations < self.exchange_interval {
            return bad(format!(
                "need total_iterations >= exchange_interval >= 1, found {} and {}",
                self.total_iterations, self.exchange_interval
            ));
        }
        if self.solvers < 1 {
            return bad("solvers must be at least 1".into());
        }
        Ok(())
    }
}

/// Ten percent of `max_neighbors`, at least one.
pub fn default_max_success(max_neighbors: usize) -> usize {
    (max_neighbors / 10).max(1)
}

/// Starting temperature `mu * cost / -ln(phi)`; a zero-cost start yields
/// `t_final`.
pub fn initial_temperature(cost: Cost, mu: f64, phi: f64, t_final: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::InvalidParameter(format!("phi must be in (0, 1), found {phi}")));
    }
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidParameter(format!("mu must be positive, found {mu}")));
    }
    if cost < 0 {
        return Err(Error::InvalidParameter(format!(
            "cost must be non-negative, found {cost}"
        )));
    }
    if cost == 0 {
        return Ok(t_final);
    }
    Ok(mu * cost as f64 / -phi.ln())
}

#[inline]
pub fn next_temperature_linear(t: f64, q: f64) -> f64 {
    q * t
}

/// Cauchy coefficient that takes `t_init` to `t_final` in
/// `total_iterations / per_level` levels.
pub fn cauchy_beta(t_init: f64, t_final: f64, total_iterations: u64, per_level: u64) -> Result<f64> {
    if t_final.is_nan() || t_final <= 0.0 || t_init.is_nan() || t_init <= t_final {
        return Err(Error::InvalidParameter(format!(
            "need t_init > t_final > 0, found {t_init} and {t_final}"
        )));
    }
    if per_level == 0 || total_iterations == 0 {
        return Err(Error::InvalidParameter("iteration counts must be positive".into()));
    }
    let levels = total_iterations as f64 / per_level as f64;
    Ok((t_init - t_final) / (levels * t_init * t_final))
}

#[inline]
pub fn next_temperature_cauchy(t: f64, beta: f64) -> f64 {
    t / (1.0 + beta * t)
}

/// Metropolis acceptor: 1 for non-worsening moves, `exp(-delta / t)` otherwise.
pub fn acceptance_probability(delta: Cost, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, found {t}"
        )));
    }
    Ok(metropolis(delta, t))
}

#[inline]
fn metropolis(delta: Cost, t: f64) -> f64 {
    if delta <= 0 {
        1.0
    } else {
        (-(delta as f64) / t).exp()
    }
}

#[derive(Debug, Clone, Copy)]
enum Cooling {
    Linear(f64),
    Cauchy(f64),
}

impl Cooling {
    fn next(self, t: f64) -> f64 {
        match self {
            Cooling::Linear(q) => next_temperature_linear(t, q),
            Cooling::Cauchy(beta) => next_temperature_cauchy(t, beta),
        }
    }
}

/// One resumable annealing chain.
#[derive(Debug, Clone)]
pub struct AnnealChain<R> {
    rng: R,
    current: Solution,
    best: Solution,
    temperature: f64,
    cooling: Cooling,
    t_final: f64,
    max_neighbors: usize,
    max_success: usize,
    level_examined: usize,
    level_accepted: usize,
    idle_levels: u32,
    remaining: u64,
    finished: bool,
}

impl<R: Rng> AnnealChain<R> {
    /// Prepares a chain with a total move `budget`; the cooling schedule is
    /// sized so that the final temperature coincides with the budget.
    pub fn new(instance: &Instance, params: &AnnealingParams, start: Solution, rng: R, budget: u64) -> Result<Self> {
        params.validate()?;
        if start.mapping.len() != instance.n() {
            return Err(Error::DimensionMismatch {
                expected: instance.n(),
                found: start.mapping.len(),
            });
        }
        let t0 = initial_temperature(start.objective, params.init_mu, params.init_phi, params.t_final)?;
        let finished = instance.n() < 2 || t0 <= params.t_final || budget == 0;
        let cooling = match params.schedule {
            Schedule::Linear => Cooling::Linear(params.linear_q),
            Schedule::Cauchy if finished => Cooling::Cauchy(0.0),
            Schedule::Cauchy => Cooling::Cauchy(cauchy_beta(t0, params.t_final, budget, params.max_neighbors as u64)?),
        };
        Ok(Self {
            rng,
            best: start.clone(),
            current: start,
            temperature: t0,
            cooling,
            t_final: params.t_final,
            max_neighbors: params.max_neighbors,
            max_success: params.max_success,
            level_examined: 0,
            level_accepted: 0,
            idle_levels: 0,
            remaining: budget,
            finished,
        })
    }

    pub fn best(&self) -> &Solution {
        &self.best
    }

    pub fn current(&self) -> &Solution {
        &self.current
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }

    /// True once the chain will make no further moves.
    pub fn is_done(&self) -> bool {
        self.finished || self.remaining == 0
    }

    /// Takes `candidate` as current and best solution when it beats this
    /// chain's best. Temperature and level counters are kept.
    pub fn adopt(&mut self, candidate: &Solution) {
        if candidate.objective < self.best.objective {
            self.current = candidate.clone();
            self.best = candidate.clone();
        }
    }

    /// Examines up to `moves` candidate swaps; returns how many were examined.
    pub fn run(&mut self, instance: &Instance, moves: u64) -> u64 {
        let mut done = 0;
        while done < moves && !self.is_done() {
            self.step(instance);
            done += 1;
        }
        done
    }

    fn step(&mut self, instance: &Instance) {
        let n = instance.n();
        let i = self.rng.gen_range(0..n);
        let mut j = self.rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let delta = swap_delta_unchecked(instance, self.current.mapping.as_slice(), i, j);
        let accept = delta <= 0 || self.rng.gen::<f64>() < metropolis(delta, self.temperature);
        if accept {
            self.current.mapping.swap_unchecked(i, j);
            self.current.objective += delta;
            self.level_accepted += 1;
            if self.current.objective < self.best.objective {
                self.best.clone_from(&self.current);
            }
        }
        self.level_examined += 1;
        self.remaining -= 1;
        if self.level_examined >= self.max_neighbors || self.level_accepted >= self.max_success {
            self.cool();
        }
    }

    fn cool(&mut self) {
        if self.level_accepted == 0 {
            self.idle_levels += 1;
        } else {
            self.idle_levels = 0;
        }
        self.level_examined = 0;
        self.level_accepted = 0;
        self.temperature = self.cooling.next(self.temperature);
        if self.temperature <= self.t_final || self.idle_levels >= STALL_LEVELS {
            self.finished = true;
        }
    }
}

/// Runs one chain from `start` for at most `budget` moves and returns the best
/// solution it visited.
pub fn anneal_chain<R: Rng>(
    instance: &Instance,
    params: &AnnealingParams,
    start: Solution,
    rng: &mut R,
    budget: u64,
) -> Result<Solution> {
    let mut chain = AnnealChain::new(instance, params, start, rng, budget)?;
    chain.run(instance, budget);
    Ok(chain.best)
}

/// A worker's group of `solvers` chains improving one shared candidate.
///
/// Chains run in segments; after each segment the best chain solution becomes
/// the process candidate and is offered to every chain.
#[derive(Debug, Clone)]
pub struct AnnealingProcess {
    chains: Vec<AnnealChain<ChaCha8Rng>>,
    best: Solution,
    exchange_interval: u64,
}

impl AnnealingProcess {
    /// Draws a random start from `rng`, then one seed per chain, and splits
    /// `budget` moves evenly over the chains.
    pub fn new<R: Rng>(instance: &Instance, params: &AnnealingParams, rng: &mut R, budget: u64) -> Result<Self> {
        let start = Solution::evaluated_unchecked(instance, random_mapping(instance.n(), rng));
        Self::from_start(instance, params, start, rng, budget)
    }

    pub fn from_start<R: Rng>(
        instance: &Instance,
        params: &AnnealingParams,
        start: Solution,
        rng: &mut R,
        budget: u64,
    ) -> Result<Self> {
        params.validate()?;
        let solvers = params.solvers as u64;
        let chains = (0..solvers)
            .map(|k| {
                let share = budget / solvers + u64::from(k < budget % solvers);
                let chain_rng = ChaCha8Rng::seed_from_u64(rng.gen());
                AnnealChain::new(instance, params, start.clone(), chain_rng, share)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            chains,
            best: start,
            exchange_interval: params.exchange_interval,
        })
    }

    /// The process candidate.
    pub fn best(&self) -> &Solution {
        &self.best
    }

    pub fn chains(&self) -> &[AnnealChain<ChaCha8Rng>] {
        &self.chains
    }

    pub fn is_done(&self) -> bool {
        self.chains.iter().all(AnnealChain::is_done)
    }

    /// Runs every chain for up to `moves` moves, then synchronizes.
    pub fn run_segment(&mut self, instance: &Instance, moves: u64) {
        for chain in &mut self.chains {
            chain.run(instance, moves);
        }
        let mut leader: Option<&Solution> = None;
        for chain in &self.chains {
            if leader.is_none_or(|l| chain.best().objective < l.objective) {
                leader = Some(chain.best());
            }
        }
        if let Some(leader) = leader.cloned() {
            self.adopt(&leader);
        }
    }

    /// Makes `candidate` the process candidate when it is strictly better, and
    /// offers it to every chain.
    pub fn adopt(&mut self, candidate: &Solution) {
        if candidate.objective < self.best.objective {
            self.best = candidate.clone();
        }
        for chain in &mut self.chains {
            chain.adopt(&self.best);
        }
    }

    /// Runs segments of `exchange_interval` moves until every chain is done.
    pub fn run_to_completion(&mut self, instance: &Instance) {
        while !self.is_done() {
            self.run_segment(instance, self.exchange_interval);
        }
    }
}

/// Runs `params.solvers` chains sharing `budget` moves from a random start and
/// returns the best solution found.
pub fn anneal_process<R: Rng>(
    instance: &Instance,
    params: &AnnealingParams,
    rng: &mut R,
    budget: u64,
) -> Result<Solution> {
    let mut process = AnnealingProcess::new(instance, params, rng, budget)?;
    process.run_to_completion(instance);
    Ok(process.best)
}
