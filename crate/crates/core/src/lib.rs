//! Heuristics for placing the processes of a parallel program onto the nodes
//! of a machine so that heavily communicating processes sit on closely
//! connected nodes.
//!
//! The placement cost of a [`Mapping`] is the sum over all ordered process
//! pairs of their exchange intensity times the distance between their nodes
//! (a quadratic assignment objective). Three parallel searches minimize it:
//!
//! * [`run_parallel_sa`]: simulated annealing workers that periodically
//!   broadcast the best solution found so far;
//! * [`run_parallel_ga`]: island genetic algorithm with ring migration;
//! * [`run_composite`]: annealing seeds the populations of the genetic stage.
//!
//! The [`experiment`] module repeats runs, aggregates them against the known
//! optima of the Taillard `taiXXe01` benchmark set and writes CSV reports.

pub mod annealing;
mod error;
pub mod experiment;
pub mod genetic;
pub mod instance;
pub mod mapping;
pub mod orchestrator;
pub mod verify;

/// Objective values and their differences.
pub type Cost = i64;

pub use annealing::{anneal_chain, anneal_process, AnnealingParams, Schedule};
pub use error::{Error, Result};
pub use experiment::{brute_force_optimum, run_experiment, sweep_parameter, BenchReport, RunRecord};
pub use genetic::{GeneticParams, Population};
pub use instance::{
    find_instance, generate_random_instance, known_optimum, load_instance, parse_instance, Instance, OptimaRegistry,
    INSTANCE_DIR_ENV,
};
pub use mapping::{accuracy, apply_swap, evaluate, mean_random_cost, random_mapping, swap_delta, Mapping, Solution};
pub use orchestrator::{
    run_composite, run_parallel_ga, run_parallel_sa, Algorithm, ParallelConfig, RunOutcome, RunSetup,
};
