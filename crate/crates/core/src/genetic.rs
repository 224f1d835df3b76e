//! Steady-state genetic algorithm over permutation individuals.
//!
//! Each generation breeds `offspring_per_iteration` children by binary
//! tournament, partially-mapped crossover and swap mutation, then lets each
//! child displace the current worst member if it is strictly better and not
//! already present.

use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mapping::{random_mapping, Mapping, Solution};
use crate::orchestrator::default_total_iterations;

pub const DEFAULT_CROSSOVER_PROB: f64 = 1.0;
pub const DEFAULT_MUTATION_PROB: f64 = 0.001;
pub const DEFAULT_OFFSPRING: usize = 2;
pub const DEFAULT_MIGRANTS: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneticParams {
    pub population_size: usize,
    pub crossover_prob: f64,
    /// Per-gene probability of a swap with a random partner gene.
    pub mutation_prob: f64,
    pub offspring_per_iteration: usize,
    /// Solutions sent to the ring neighbour after each generation.
    pub migrants: usize,
    /// Generation budget.
    pub iterations: u64,
}

impl GeneticParams {
    pub fn for_order(n: usize) -> Self {
        Self {
            population_size: n.max(2),
            crossover_prob: DEFAULT_CROSSOVER_PROB,
            mutation_prob: DEFAULT_MUTATION_PROB,
            offspring_per_iteration: DEFAULT_OFFSPRING,
            migrants: DEFAULT_MIGRANTS,
            iterations: default_total_iterations(n),
        }
    }

    /// Checks ranges, and that the population is at least as large as the
    /// instance order.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.population_size < 2 || self.population_size < n {
            return bad(format!(
                "population_size must be at least max(2, n) = {}, found {}",
                n.max(2),
                self.population_size
            ));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], found {p}"));
            }
        }
        if self.offspring_per_iteration < 1 {
            return bad("offspring_per_iteration must be at least 1".into());
        }
        Ok(())
    }
}

/// The members of one island.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    members: Vec<Solution>,
}

impl Population {
    pub fn new(members: Vec<Solution>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::PopulationTooSmall {
                needed: 2,
                found: members.len(),
            });
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, mapping: &Mapping) -> bool {
        self.members.iter().any(|m| &m.mapping == mapping)
    }

    /// Member with the lowest objective, earliest on ties.
    pub fn best(&self) -> &Solution {
        &self.members[best_index(&self.members)]
    }

    /// Index of the member with the highest objective, latest on ties.
    fn worst_index(&self) -> usize {
        let mut worst = 0;
        for (idx, m) in self.members.iter().enumerate() {
            if m.objective >= self.members[worst].objective {
                worst = idx;
            }
        }
        worst
    }

    /// The `count` best members, best first.
    pub fn elite(&self, count: usize) -> Vec<Solution> {
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by_key(|&i| (self.members[i].objective, i));
        order.into_iter().take(count).map(|i| self.members[i].clone()).collect()
    }
}

fn best_index(members: &[Solution]) -> usize {
    let mut best = 0;
    for (idx, m) in members.iter().enumerate() {
        if m.objective < members[best].objective {
            best = idx;
        }
    }
    best
}

/// `size` independent uniformly random members.
pub fn init_population<R: Rng>(instance: &Instance, size: usize, rng: &mut R) -> Result<Population> {
    let members = (0..size)
        .map(|_| Solution::evaluated_unchecked(instance, random_mapping(instance.n(), rng)))
        .collect();
    Population::new(members)
}

/// Partially-mapped crossover: a random slice of `parent_a` is kept in place
/// and the remaining positions are filled from `parent_b`, following the
/// slice's value correspondence to resolve conflicts.
pub fn crossover<R: Rng>(parent_a: &Mapping, parent_b: &Mapping, rng: &mut R) -> Result<Mapping> {
    let n = parent_a.len();
    if parent_b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: parent_b.len(),
        });
    }
    if n < 2 {
        return Ok(parent_a.clone());
    }
    let (a, b) = (parent_a.as_slice(), parent_b.as_slice());
    let mut lo = rng.gen_range(0..n);
    let mut hi = rng.gen_range(0..n);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut pos_in_a = vec![0; n];
    for (idx, &v) in a.iter().enumerate() {
        pos_in_a[v] = idx;
    }
    let in_slice = |idx: usize| (lo..=hi).contains(&idx);
    let child = (0..n)
        .map(|idx| {
            if in_slice(idx) {
                return a[idx];
            }
            let mut v = b[idx];
            while in_slice(pos_in_a[v]) {
                v = b[pos_in_a[v]];
            }
            v
        })
        .collect();
    Ok(Mapping::from_vec_unchecked(child))
}

/// Each gene, with probability `per_gene_prob`, trades places with another
/// uniformly chosen gene.
pub fn mutate<R: Rng>(mapping: &Mapping, per_gene_prob: f64, rng: &mut R) -> Result<Mapping> {
    if !(0.0..=1.0).contains(&per_gene_prob) {
        return Err(Error::InvalidParameter(format!(
            "mutation probability must be in [0, 1], found {per_gene_prob}"
        )));
    }
    let mut out = mapping.clone();
    let n = out.len();
    if per_gene_prob == 0.0 || n < 2 {
        return Ok(out);
    }
    for i in 0..n {
        if rng.gen::<f64>() < per_gene_prob {
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            out.swap_unchecked(i, j);
        }
    }
    Ok(out)
}

fn tournament<R: Rng>(members: &[Solution], exclude: Option<usize>, rng: &mut R) -> usize {
    let pool = members.len() - usize::from(exclude.is_some());
    let skip = |raw: usize| match exclude {
        Some(e) if raw >= e => raw + 1,
        _ => raw,
    };
    if pool == 1 {
        return skip(0);
    }
    let x = rng.gen_range(0..pool);
    let mut y = rng.gen_range(0..pool - 1);
    if y >= x {
        y += 1;
    }
    let (x, y) = (skip(x), skip(y));
    let (lo, hi) = (x.min(y), x.max(y));
    if members[hi].objective < members[lo].objective {
        hi
    } else {
        lo
    }
}

/// Two distinct members, each the winner of a binary tournament (lower
/// objective wins).
pub fn select_parents<'a, R: Rng>(population: &'a Population, rng: &mut R) -> Result<(&'a Solution, &'a Solution)> {
    let members = population.members();
    if members.len() < 2 {
        return Err(Error::PopulationTooSmall {
            needed: 2,
            found: members.len(),
        });
    }
    let first = tournament(members, None, rng);
    let second = tournament(members, Some(first), rng);
    Ok((&members[first], &members[second]))
}

/// Offers each candidate in turn: it replaces the current worst member when
/// its objective is strictly lower and its mapping is not already present.
/// Returns the number of replacements.
pub fn replace_worst(population: &mut Population, candidates: &[Solution]) -> usize {
    let mut replaced = 0;
    for cand in candidates {
        let worst = population.worst_index();
        if cand.objective < population.members[worst].objective && !population.contains(&cand.mapping) {
            population.members[worst] = cand.clone();
            replaced += 1;
        }
    }
    replaced
}

pub fn best_member(population: &Population) -> Result<&Solution> {
    if population.is_empty() {
        return Err(Error::PopulationTooSmall { needed: 1, found: 0 });
    }
    Ok(population.best())
}

/// One steady-state generation.
pub fn ga_generation<R: Rng>(
    instance: &Instance,
    population: &mut Population,
    params: &GeneticParams,
    rng: &mut R,
) -> Result<()> {
    let mut children = Vec::with_capacity(params.offspring_per_iteration);
    for _ in 0..params.offspring_per_iteration {
        let (a, b) = select_parents(population, rng)?;
        let child = if rng.gen::<f64>() < params.crossover_prob {
            crossover(&a.mapping, &b.mapping, rng)?
        } else if b.objective < a.objective {
            b.mapping.clone()
        } else {
            a.mapping.clone()
        };
        let child = mutate(&child, params.mutation_prob, rng)?;
        children.push(Solution::evaluated(instance, child)?);
    }
    replace_worst(population, &children);
    Ok(())
}
