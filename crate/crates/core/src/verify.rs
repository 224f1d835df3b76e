//! Self-check suite behind the `verify` command.
//!
//! Small random instances are solved exactly by enumerating placement
//! matrices, then the production objective, delta evaluation, heuristics and
//! reduction identities are checked against that reference.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::annealing::anneal_process;
use crate::experiment::brute_force_optimum;
use crate::instance::{generate_random_instance, Instance};
use crate::mapping::{evaluate, random_mapping, swap_delta, Mapping, Solution};
use crate::orchestrator::{run_composite, run_parallel_sa, worker_seed, Algorithm, RunSetup};
use crate::Cost;

/// Objective under test.
pub type ObjectiveFn<'a> = &'a dyn Fn(&Instance, &Mapping) -> Cost;

/// First property that did not hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub property: &'static str,
    pub detail: String,
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.property, self.detail)
    }
}

impl std::error::Error for VerifyFailure {}

/// Properties checked and how many cases each covered.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<(&'static str, usize)>,
}

/// Placement-matrix objective over all index quadruples.
fn reference_objective(instance: &Instance, mapping: &Mapping) -> Cost {
    let n = instance.n();
    let mut x = vec![0; n * n];
    for k in 0..n {
        x[k * n + mapping.node_of(k)] = 1;
    }
    let mut total = 0;
    for i in 0..n {
        for j in 0..n {
            for p in 0..n {
                for k in 0..n {
                    total += instance.distance(i, j) * instance.flow(k, p) * x[k * n + i] * x[p * n + j];
                }
            }
        }
    }
    total
}

/// Exact optimum by recursive enumeration under the reference objective.
fn reference_optimum(instance: &Instance) -> Cost {
    fn walk(instance: &Instance, prefix: &mut Vec<usize>, used: &mut [bool], best: &mut Cost) {
        let n = instance.n();
        if prefix.len() == n {
            let f = reference_objective(instance, &Mapping::from_vec_unchecked(prefix.clone()));
            *best = (*best).min(f);
            return;
        }
        for node in 0..n {
            if !used[node] {
                used[node] = true;
                prefix.push(node);
                walk(instance, prefix, used, best);
                prefix.pop();
                used[node] = false;
            }
        }
    }
    let mut best = Cost::MAX;
    walk(instance, &mut Vec::new(), &mut vec![false; instance.n()], &mut best);
    best
}

fn quick_setup(instance: &Instance, workers: usize, seed: u64) -> RunSetup {
    let mut setup = RunSetup::for_instance(instance, seed);
    setup.config.workers = workers;
    setup.annealing.total_iterations = 1_000;
    setup.genetic.iterations = 200;
    setup
}

fn fail(property: &'static str, detail: String) -> Result<(), VerifyFailure> {
    Err(VerifyFailure { property, detail })
}

fn run_err(property: &'static str) -> impl Fn(crate::Error) -> VerifyFailure {
    move |e| VerifyFailure {
        property,
        detail: e.to_string(),
    }
}

/// Runs every check with the production objective.
pub fn run_verification(seed: u64) -> Result<VerifyReport, VerifyFailure> {
    run_verification_with(seed, &|inst, m| evaluate(inst, m).expect("matching dimensions"))
}

/// Runs every check, evaluating returned mappings with `objective`.
pub fn run_verification_with(seed: u64, objective: ObjectiveFn<'_>) -> Result<VerifyReport, VerifyFailure> {
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<Instance> = (0..6)
        .map(|k| generate_random_instance(4 + k % 4, 20, rng.gen()).expect("valid order"))
        .collect();

    // lower bound: nothing may beat the exact optimum
    let mut cases = 0;
    for inst in &instances {
        let f0 = reference_optimum(inst);
        let oracle = brute_force_optimum(inst).map_err(run_err("oracle-agreement"))?;
        if oracle.objective != f0 {
            fail(
                "oracle-agreement",
                format!(
                    "{}: exhaustive search gave {}, reference {}",
                    inst.name(),
                    oracle.objective,
                    f0
                ),
            )?;
        }
        let setup = quick_setup(inst, 2, rng.gen());
        let mut found = vec![oracle.mapping];
        for alg in Algorithm::ALL {
            found.push(setup.run(inst, alg).map_err(run_err("lower-bound"))?.best.mapping);
        }
        for mapping in found {
            let f = objective(inst, &mapping);
            cases += 1;
            if f < f0 {
                fail(
                    "lower-bound",
                    format!(
                        "{}: objective {f} below exact optimum {f0} for mapping [{mapping}]",
                        inst.name()
                    ),
                )?;
            }
        }
    }
    report.checks.push(("lower-bound", cases));

    // objective convention against the placement-matrix form
    let mut cases = 0;
    for inst in &instances {
        for _ in 0..20 {
            let m = random_mapping(inst.n(), &mut rng);
            let (f, reference) = (objective(inst, &m), reference_objective(inst, &m));
            cases += 1;
            if f != reference {
                fail(
                    "objective-convention",
                    format!("{}: objective {f}, placement-matrix sum {reference}", inst.name()),
                )?;
            }
        }
    }
    report.checks.push(("objective-convention", cases));

    // delta evaluation equals the difference of full evaluations
    let mut cases = 0;
    for _ in 0..2_000 {
        let n = rng.gen_range(2..=12);
        let inst = generate_random_instance(n, 50, rng.gen()).expect("valid order");
        let m = random_mapping(n, &mut rng);
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let delta = swap_delta(&inst, &m, i, j).map_err(run_err("delta-consistency"))?;
        let mut swapped = m.clone();
        swapped.swap(i, j).map_err(run_err("delta-consistency"))?;
        let expected = objective(&inst, &swapped) - objective(&inst, &m);
        cases += 1;
        if delta != expected {
            fail(
                "delta-consistency",
                format!(
                    "{}: swap ({i}, {j}) delta {delta}, full re-evaluation {expected}",
                    inst.name()
                ),
            )?;
        }
    }
    report.checks.push(("delta-consistency", cases));

    // single-worker annealing is exactly one process
    let mut cases = 0;
    for inst in &instances {
        let setup = quick_setup(inst, 1, rng.gen());
        let parallel = run_parallel_sa(inst, &setup.annealing, &setup.config).map_err(run_err("p1-reduction"))?;
        let mut worker_rng = ChaCha8Rng::seed_from_u64(worker_seed(setup.config.seed, 0, Algorithm::Annealing));
        let budget = setup.annealing.total_iterations * setup.annealing.solvers as u64;
        let single =
            anneal_process(inst, &setup.annealing, &mut worker_rng, budget).map_err(run_err("p1-reduction"))?;
        cases += 1;
        if parallel != single {
            fail(
                "p1-reduction",
                format!(
                    "{}: parallel {} vs single process {}",
                    inst.name(),
                    parallel.objective,
                    single.objective
                ),
            )?;
        }
    }
    report.checks.push(("p1-reduction", cases));

    // composite without generations returns the best annealing result
    let mut cases = 0;
    for inst in &instances {
        let mut setup = quick_setup(inst, 2, rng.gen());
        setup.genetic.iterations = 0;
        let composite = run_composite(inst, &setup.annealing, &setup.genetic, &setup.config)
            .map_err(run_err("composite-reduction"))?;
        let budget = setup.annealing.total_iterations * setup.annealing.solvers as u64;
        let mut stage_one: Option<Solution> = None;
        for rank in 0..setup.config.workers {
            let mut r = ChaCha8Rng::seed_from_u64(worker_seed(setup.config.seed, rank, Algorithm::Composite));
            let s = anneal_process(inst, &setup.annealing, &mut r, budget).map_err(run_err("composite-reduction"))?;
            if stage_one.as_ref().is_none_or(|b| s.objective < b.objective) {
                stage_one = Some(s);
            }
        }
        cases += 1;
        if Some(&composite) != stage_one.as_ref() {
            fail(
                "composite-reduction",
                format!("{}: composite returned {}", inst.name(), composite.objective),
            )?;
        }
    }
    report.checks.push(("composite-reduction", cases));

    Ok(report)
}
