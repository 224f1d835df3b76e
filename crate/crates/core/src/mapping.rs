//! Process-to-node mappings and the communication-cost objective.
//!
//! A mapping assigns each process `k` a distinct machine node `assignment[k]`;
//! it is the permutation form of the 0/1 placement matrix. The objective sums
//! `flow(k, p) * distance(node(k), node(p))` over all ordered process pairs.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::Cost;

/// A bijection from processes to nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mapping(Vec<usize>);

impl Mapping {
    /// Wraps an assignment, checking that it is a permutation of `0..len`.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let n = assignment.len();
        let mut seen = vec![false; n];
        for &node in &assignment {
            if node >= n || std::mem::replace(&mut seen[node], true) {
                return Err(Error::NotAPermutation { n });
            }
        }
        Ok(Self(assignment))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub(crate) fn from_vec_unchecked(assignment: Vec<usize>) -> Self {
        debug_assert!(Mapping::new(assignment.clone()).is_ok());
        Self(assignment)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn node_of(&self, process: usize) -> usize {
        self.0[process]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn is_permutation(&self) -> bool {
        Mapping::new(self.0.clone()).is_ok()
    }

    /// The node-to-process view of the same placement.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (process, &node) in self.0.iter().enumerate() {
            inv[node] = process;
        }
        Self(inv)
    }

    /// Exchanges the nodes of processes `i` and `j` in place.
    pub fn swap(&mut self, i: usize, j: usize) -> Result<()> {
        let len = self.0.len();
        for index in [i, j] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        self.0.swap(i, j);
        Ok(())
    }

    #[inline]
    pub(crate) fn swap_unchecked(&mut self, i: usize, j: usize) {
        self.0.swap(i, j);
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for node in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{node}")?;
            first = false;
        }
        Ok(())
    }
}

/// A mapping together with its cached objective value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    pub mapping: Mapping,
    pub objective: Cost,
}

impl Solution {
    /// Evaluates `mapping` on `instance`.
    pub fn evaluated(instance: &Instance, mapping: Mapping) -> Result<Self> {
        let objective = evaluate(instance, &mapping)?;
        Ok(Self { mapping, objective })
    }

    pub(crate) fn evaluated_unchecked(instance: &Instance, mapping: Mapping) -> Self {
        let objective = evaluate_unchecked(instance, &mapping);
        Self { mapping, objective }
    }

    /// Whether the cached objective matches a fresh evaluation.
    pub fn is_consistent(&self, instance: &Instance) -> bool {
        evaluate(instance, &self.mapping).is_ok_and(|f| f == self.objective)
    }
}

fn check_len(instance: &Instance, mapping: &Mapping) -> Result<()> {
    if mapping.len() != instance.n() {
        return Err(Error::DimensionMismatch {
            expected: instance.n(),
            found: mapping.len(),
        });
    }
    Ok(())
}

/// Full objective: `sum over (k, p) of flow(k, p) * distance(node(k), node(p))`.
pub fn evaluate(instance: &Instance, mapping: &Mapping) -> Result<Cost> {
    check_len(instance, mapping)?;
    Ok(evaluate_unchecked(instance, mapping))
}

pub(crate) fn evaluate_unchecked(instance: &Instance, mapping: &Mapping) -> Cost {
    let nodes = mapping.as_slice();
    let mut total: Cost = 0;
    for (k, &node_k) in nodes.iter().enumerate() {
        let flows = instance.flow_row(k);
        let dists = instance.distance_row(node_k);
        total += flows
            .iter()
            .zip(nodes)
            .map(|(&c, &node_p)| c * dists[node_p])
            .sum::<Cost>();
    }
    total
}

/// Objective change from exchanging the nodes of processes `i` and `j`,
/// computed in `O(n)`. Works for asymmetric matrices.
pub fn swap_delta(instance: &Instance, mapping: &Mapping, i: usize, j: usize) -> Result<Cost> {
    check_len(instance, mapping)?;
    let len = mapping.len();
    for index in [i, j] {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
    }
    Ok(swap_delta_unchecked(instance, mapping.as_slice(), i, j))
}

#[inline]
pub(crate) fn swap_delta_unchecked(instance: &Instance, nodes: &[usize], i: usize, j: usize) -> Cost {
    if i == j {
        return 0;
    }
    let (ni, nj) = (nodes[i], nodes[j]);
    let c = |a, b| instance.flow(a, b);
    let m = |a, b| instance.distance(a, b);
    let mut delta = (c(i, i) - c(j, j)) * (m(nj, nj) - m(ni, ni)) + (c(i, j) - c(j, i)) * (m(nj, ni) - m(ni, nj));
    let (ci, cj) = (instance.flow_row(i), instance.flow_row(j));
    let (mi, mj) = (instance.distance_row(ni), instance.distance_row(nj));
    for (k, &nk) in nodes.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        let mk = instance.distance_row(nk);
        delta += (c(k, i) - c(k, j)) * (mk[nj] - mk[ni]) + (ci[k] - cj[k]) * (mj[nk] - mi[nk]);
    }
    delta
}

/// Copy of `mapping` with entries `i` and `j` exchanged.
pub fn apply_swap(mapping: &Mapping, i: usize, j: usize) -> Result<Mapping> {
    let mut out = mapping.clone();
    out.swap(i, j)?;
    Ok(out)
}

/// Uniformly random permutation of `0..n`.
pub fn random_mapping<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mapping {
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(rng);
    Mapping(nodes)
}

/// Expected objective of a uniformly random mapping.
pub fn mean_random_cost(instance: &Instance) -> f64 {
    let n = instance.n();
    if n < 2 {
        return 0.0;
    }
    let flows: Cost = instance.flows().iter().sum();
    let distances: Cost = instance.distances().iter().sum();
    flows as f64 * distances as f64 / (n * (n - 1)) as f64
}

/// Percent excess of `objective` over the known optimum.
pub fn accuracy(objective: Cost, optimum: Cost) -> Result<f64> {
    if optimum <= 0 {
        return Err(Error::NonPositiveOptimum(optimum));
    }
    Ok(100.0 * (objective - optimum) as f64 / optimum as f64)
}
