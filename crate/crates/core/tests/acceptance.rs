//! Acceptance suite: one PASS / FAIL / BLOCKED line per criterion.
//!
//! Criteria 3 to 5 need the `tai27e01`, `tai45e01`, `tai75e01` and
//! `tai125e01` files, looked up in `$NODEMAP_INSTANCE_DIR` and then in
//! `data/taillard/` at the workspace root. Without them those criteria report
//! BLOCKED; set `NODEMAP_REQUIRE_INSTANCES=1` to make BLOCKED fail the run.
//! Pass criterion numbers as arguments to run a subset.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nodemap_core::annealing::{
    acceptance_probability, cauchy_beta, next_temperature_cauchy, next_temperature_linear, AnnealChain,
};
use nodemap_core::genetic::{crossover, ga_generation, init_population, mutate};
use nodemap_core::orchestrator::worker_seed;
use nodemap_core::{
    accuracy, anneal_process, apply_swap, brute_force_optimum, evaluate, find_instance, generate_random_instance,
    load_instance, random_mapping, run_composite, run_experiment, run_parallel_sa, swap_delta, sweep_parameter,
    Algorithm, AnnealingParams, Cost, Instance, Mapping, RunSetup, Schedule, Solution, INSTANCE_DIR_ENV,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Blocked(String),
}

use Verdict::{Blocked, Fail, Pass};

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn within(limit: Duration, started: Instant, verdict: Verdict) -> Verdict {
    let spent = started.elapsed();
    match verdict {
        Pass(d) if spent > limit => Fail(format!("{d}; took {spent:.0?}, limit {limit:?}")),
        other => other,
    }
}

fn instance_dirs() -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    if let Some(dir) = std::env::var_os(INSTANCE_DIR_ENV) {
        dirs.push(PathBuf::from(dir));
    }
    dirs.push(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/taillard"));
    dirs
}

fn taillard(names: &[&str]) -> Result<Vec<Instance>, Verdict> {
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for name in names {
        match find_instance(name, &instance_dirs()) {
            Some(path) => match load_instance(&path) {
                Ok(inst) if inst.known_optimum().is_some() => out.push(inst),
                Ok(_) => return Err(Fail(format!("{name}: no registered optimum"))),
                Err(e) => return Err(Fail(format!("{name}: {e}"))),
            },
            None => missing.push(*name),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(Blocked(format!(
            "instance file(s) {} not found in ${INSTANCE_DIR_ENV} or data/taillard",
            missing.join(", ")
        )))
    }
}

fn mean_objective(records: &[nodemap_core::RunRecord]) -> f64 {
    records.iter().map(|r| r.objective as f64).sum::<f64>() / records.len() as f64
}

fn mean_accuracy(records: &[nodemap_core::RunRecord]) -> f64 {
    records
        .iter()
        .map(|r| r.accuracy.expect("optimum registered"))
        .sum::<f64>()
        / records.len() as f64
}

/// Pair-sum objective over the raw matrices.
fn plain_objective(inst: &Instance, nodes: &[usize]) -> Cost {
    let (n, d, c) = (inst.n(), inst.distances(), inst.flows());
    let mut total = 0;
    for k in 0..n {
        for p in 0..n {
            total += c[k * n + p] * d[nodes[k] * n + nodes[p]];
        }
    }
    total
}

/// Minimum over all orderings generated by Heap's algorithm.
fn heap_minimum(inst: &Instance) -> Cost {
    let n = inst.n();
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    let mut best = plain_objective(inst, &a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            best = best.min(plain_objective(inst, &a));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn generous_setup(inst: &Instance, seed: u64) -> RunSetup {
    let mut setup = RunSetup::for_instance(inst, seed);
    setup.config.workers = 4;
    setup.annealing.total_iterations = 20_000;
    setup.genetic.population_size = 32 * inst.n();
    setup.genetic.iterations = 2_000;
    setup
}

fn criterion_1() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd5);
    let mut worst = [10usize; 3];
    for k in 0..50 {
        let n = 4 + k % 5;
        let inst = generate_random_instance(n, 20, rng.gen()).expect("order in range");
        let oracle = brute_force_optimum(&inst).expect("within oracle limit");
        let reference = heap_minimum(&inst);
        if oracle.objective != reference || plain_objective(&inst, oracle.mapping.as_slice()) != reference {
            return Fail(format!(
                "{}: oracle {} vs enumeration {reference}",
                inst.name(),
                oracle.objective
            ));
        }
        for (slot, alg) in Algorithm::ALL.into_iter().enumerate() {
            let hits = (0..10)
                .filter(|&seed| {
                    let out = generous_setup(&inst, seed).run(&inst, alg).expect("valid setup");
                    out.best.objective == reference
                })
                .count();
            worst[slot] = worst[slot].min(hits);
        }
    }
    let detail = format!(
        "50 instances n=4..8, oracle agrees; worst hit rate sa {}/10, ga {}/10, composite {}/10",
        worst[0], worst[1], worst[2]
    );
    within(
        Duration::from_secs(300),
        started,
        check(worst.iter().all(|&h| h >= 9), detail),
    )
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Vec<Cost> {
    let max = rng.gen_range(1..=1000);
    let density = rng.gen_range(0.1..=1.0);
    (0..n * n)
        .map(|idx| {
            if idx / n == idx % n || !rng.gen_bool(density) {
                0
            } else {
                rng.gen_range(0..=max)
            }
        })
        .collect()
}

fn criterion_2() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xde17a);
    for case in 0..10_000 {
        let n = rng.gen_range(5..=50);
        let inst = Instance::new(
            format!("delta{case}"),
            n,
            random_matrix(n, &mut rng),
            random_matrix(n, &mut rng),
        )
        .expect("valid matrices");
        let m = random_mapping(n, &mut rng);
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let delta = swap_delta(&inst, &m, i, j).expect("in range");
        let expected =
            evaluate(&inst, &apply_swap(&m, i, j).expect("in range")).unwrap() - evaluate(&inst, &m).unwrap();
        if delta != expected {
            return Fail(format!(
                "case {case} (n={n}, swap {i},{j}): delta {delta}, re-evaluation {expected}"
            ));
        }
    }
    within(
        Duration::from_secs(60),
        started,
        Pass("10000 triples n=5..50, asymmetric and sparse matrices, zero mismatches".into()),
    )
}

fn criterion_3() -> Verdict {
    let started = Instant::now();
    let insts = match taillard(&["tai27e01", "tai45e01"]) {
        Ok(v) => v,
        Err(v) => return v,
    };
    let run = |inst: &Instance, alg| {
        let setup = RunSetup::for_instance(inst, 1);
        run_experiment(inst, alg, &setup, 10).expect("defaults are valid")
    };
    let sa27 = mean_accuracy(run(&insts[0], Algorithm::Annealing).records());
    let ga27 = mean_objective(run(&insts[0], Algorithm::Genetic).records());
    let comp27 = mean_objective(run(&insts[0], Algorithm::Composite).records());
    let sa45 = mean_accuracy(run(&insts[1], Algorithm::Annealing).records());
    let detail = format!(
        "tai27e01 sa A1 {sa27:.2}% (<= 5), composite mean F {comp27:.1} vs ga {ga27:.1}; tai45e01 sa A1 {sa45:.2}% (<= 15)"
    );
    within(
        Duration::from_secs(600),
        started,
        check(sa27 <= 5.0 && comp27 <= ga27 && sa45 <= 15.0, detail),
    )
}

fn criterion_4() -> Verdict {
    let started = Instant::now();
    let inst = match taillard(&["tai125e01"]) {
        Ok(mut v) => v.remove(0),
        Err(v) => return v,
    };
    let f0 = inst.known_optimum().expect("registered");
    let mut setup = RunSetup::for_instance(&inst, 1);
    setup.annealing.total_iterations /= 10;
    setup.genetic.iterations /= 10;
    let mut parts = Vec::new();
    let mut ok = true;
    for alg in Algorithm::ALL {
        let out = setup.run(&inst, alg).expect("valid setup");
        let f = out.best.objective;
        let monotone = out.trace.windows(2).all(|w| w[1] <= w[0])
            && out.worker_traces.iter().all(|t| t.windows(2).all(|w| w[1] <= w[0]));
        ok &= f0 <= f && f <= 2 * f0 && monotone && out.best.is_consistent(&inst);
        parts.push(format!(
            "{alg} F {f} ({:.2}x F0){}",
            f as f64 / f0 as f64,
            if monotone { "" } else { " trace rose" }
        ));
    }
    within(
        Duration::from_secs(900),
        started,
        check(ok, format!("tai125e01 at 1/10 budget: {}", parts.join(", "))),
    )
}

fn criterion_5() -> Verdict {
    let started = Instant::now();
    let inst = match taillard(&["tai75e01"]) {
        Ok(mut v) => v.remove(0),
        Err(v) => return v,
    };
    let base = RunSetup::for_instance(&inst, 1);
    let sweep = |param: &str, values: &[&str]| -> Vec<f64> {
        let values: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        let report = sweep_parameter(&inst, Algorithm::Annealing, &base, param, &values, 5).expect("valid sweep");
        report.aggregates().iter().map(|a| a.mean_objective).collect()
    };
    let schedule = sweep("schedule", &["cauchy", "linear"]);
    let neighbors = sweep("max_neighbors", &["10", "50", "200"]);
    let interval = sweep("exchange_interval", &["10", "100", "1000"]);
    let not_worst = |means: &[f64]| {
        means[1] < means.iter().cloned().fold(f64::MIN, f64::max) || means.iter().all(|&m| m == means[1])
    };
    let (a, b, c) = (schedule[0] <= schedule[1], not_worst(&neighbors), not_worst(&interval));
    let detail = format!(
        "tai75e01 mean F: cauchy {:.1} vs linear {:.1}; max_neighbors 10/50/200 {:.1}/{:.1}/{:.1}; exchange_interval 10/100/1000 {:.1}/{:.1}/{:.1}",
        schedule[0], schedule[1], neighbors[0], neighbors[1], neighbors[2], interval[0], interval[1], interval[2]
    );
    within(Duration::from_secs(900), started, check(a && b && c, detail))
}

fn criterion_6() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    // bijectivity under every operator
    let mut applications = 0u64;
    while applications < 1_000_000 {
        let n = rng.gen_range(2..=40);
        let mut m = random_mapping(n, &mut rng);
        for _ in 0..100 {
            m = match rng.gen_range(0..4) {
                0 => apply_swap(&m, rng.gen_range(0..n), rng.gen_range(0..n)).unwrap(),
                1 => mutate(&m, rng.gen_range(0.0..=0.2), &mut rng).unwrap(),
                2 => crossover(&m, &random_mapping(n, &mut rng), &mut rng).unwrap(),
                _ => m.inverse(),
            };
            applications += 1;
            if !m.is_permutation() || Mapping::new(m.as_slice().to_vec()).is_err() {
                return Fail(format!("operator application {applications} broke a bijection: [{m}]"));
            }
        }
    }

    // schedules strictly decrease
    for _ in 0..1_000 {
        let t0 = rng.gen_range(1.0..1e6);
        let tf = t0 * rng.gen_range(1e-6..0.5);
        let q = rng.gen_range(0.5..0.999);
        let beta = cauchy_beta(t0, tf, rng.gen_range(1_000..1_000_000), 50).unwrap();
        let (mut lin, mut cau) = (t0, t0);
        for _ in 0..200 {
            let (l, c) = (next_temperature_linear(lin, q), next_temperature_cauchy(cau, beta));
            if !(l < lin && l > 0.0 && c < cau && c > 0.0) {
                return Fail(format!(
                    "schedule step did not strictly decrease (t0 {t0}, q {q}, beta {beta})"
                ));
            }
            (lin, cau) = (l, c);
        }
    }
    let inst = generate_random_instance(9, 20, 61).unwrap();
    for schedule in [Schedule::Linear, Schedule::Cauchy] {
        let params = AnnealingParams {
            schedule,
            ..AnnealingParams::for_instance(&inst)
        };
        let start = Solution::evaluated(&inst, random_mapping(9, &mut rng)).unwrap();
        let mut chain = AnnealChain::new(&inst, &params, start, ChaCha8Rng::seed_from_u64(2), 20_000).unwrap();
        let mut last = chain.temperature();
        while !chain.is_done() {
            chain.run(&inst, 1);
            let t = chain.temperature();
            if t > last {
                return Fail(format!("{schedule} chain temperature rose from {last} to {t}"));
            }
            last = t;
        }
    }

    // acceptor boundaries
    let boundary = acceptance_probability(-3, 5.0).unwrap() == 1.0
        && acceptance_probability(0, 5.0).unwrap() == 1.0
        && (acceptance_probability(7, 7.0).unwrap() - (-1.0f64).exp()).abs() <= 1e-12;
    if !boundary {
        return Fail("acceptance probability boundary cases".into());
    }

    // no run beats a registered optimum
    let mut registered: Vec<Instance> = (0..6)
        .map(|k| {
            let inst = generate_random_instance(5 + k % 4, 30, 600 + k as u64).unwrap();
            let f0 = brute_force_optimum(&inst).unwrap().objective;
            inst.with_known_optimum(Some(f0)).unwrap()
        })
        .collect();
    let tai = ["tai27e01", "tai45e01"]
        .iter()
        .filter_map(|name| find_instance(name, &instance_dirs()).and_then(|p| load_instance(&p).ok()))
        .filter(|inst| inst.known_optimum().is_some());
    registered.extend(tai);
    let mut runs = 0;
    for inst in &registered {
        let f0 = inst.known_optimum().unwrap();
        let mut setup = RunSetup::for_instance(inst, 5);
        setup.config.workers = 2;
        setup.annealing.total_iterations = 2_000;
        setup.genetic.iterations = 200;
        for alg in Algorithm::ALL {
            let f = setup.run(inst, alg).unwrap().best.objective;
            runs += 1;
            if f < f0 {
                return Fail(format!("{} {alg}: F {f} below F0 {f0}", inst.name()));
            }
        }
    }

    // bit-identical repeats
    let inst = generate_random_instance(10, 25, 66).unwrap();
    for workers in [1, 2, 8] {
        for alg in Algorithm::ALL {
            let mut setup = RunSetup::for_instance(&inst, 99);
            setup.config.workers = workers;
            setup.annealing.total_iterations = 2_000;
            setup.genetic.iterations = 300;
            let (a, b) = (setup.run(&inst, alg).unwrap(), setup.run(&inst, alg).unwrap());
            if a != b {
                return Fail(format!("{alg} with P={workers} differed between repeats"));
            }
        }
    }
    within(
        Duration::from_secs(300),
        started,
        Pass(format!(
            "{applications} operator applications, schedules, acceptor bounds, F >= F0 over {runs} runs on {} registered instances, repeats identical at P=1,2,8",
            registered.len()
        )),
    )
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = 0;
    for k in 0..10 {
        let inst = generate_random_instance(5 + k % 6, 20, rng.gen()).unwrap();
        let mut setup = RunSetup::for_instance(&inst, rng.gen());
        setup.annealing.total_iterations = 1_500;

        setup.config.workers = 1;
        let parallel = run_parallel_sa(&inst, &setup.annealing, &setup.config).unwrap();
        let mut worker = ChaCha8Rng::seed_from_u64(worker_seed(setup.config.seed, 0, Algorithm::Annealing));
        let budget = setup.annealing.total_iterations * setup.annealing.solvers as u64;
        let sequential = anneal_process(&inst, &setup.annealing, &mut worker, budget).unwrap();
        if parallel != sequential {
            return Fail(format!(
                "{}: P=1 gave {}, sequential {}",
                inst.name(),
                parallel.objective,
                sequential.objective
            ));
        }

        setup.config.workers = 3;
        setup.genetic.iterations = 0;
        let composite = run_composite(&inst, &setup.annealing, &setup.genetic, &setup.config).unwrap();
        let stage_one = (0..3)
            .map(|rank| {
                let mut r = ChaCha8Rng::seed_from_u64(worker_seed(setup.config.seed, rank, Algorithm::Composite));
                anneal_process(&inst, &setup.annealing, &mut r, budget).unwrap()
            })
            .reduce(|best, s| if s.objective < best.objective { s } else { best })
            .unwrap();
        if composite != stage_one {
            return Fail(format!(
                "{}: composite {} vs stage-1 best {}",
                inst.name(),
                composite.objective,
                stage_one.objective
            ));
        }

        let mut params = setup.genetic.clone();
        params.crossover_prob = 0.0;
        params.mutation_prob = 0.0;
        let mut pop = init_population(&inst, params.population_size, &mut rng).unwrap();
        let members = |p: &nodemap_core::Population| {
            let mut v: Vec<Vec<usize>> = p.members().iter().map(|s| s.mapping.as_slice().to_vec()).collect();
            v.sort();
            v
        };
        let before = members(&pop);
        for _ in 0..300 {
            ga_generation(&inst, &mut pop, &params, &mut rng).unwrap();
        }
        if members(&pop) != before {
            return Fail(format!("{}: copy-only generations changed the population", inst.name()));
        }
        cases += 1;
    }
    Pass(format!(
        "{cases} instances: P=1 annealing, composite without generations, copy-only GA all exact"
    ))
}

fn criterion_8() -> Verdict {
    let a = accuracy(724_820, 469_650).unwrap();
    let b = accuracy(168_120, 145_862).unwrap();
    check(
        a.round() == 54.0 && b.round() == 15.0,
        format!(
            "A1(724820, 469650) = {a:.2} -> {}, A1(168120, 145862) = {b:.2} -> {}",
            a.round(),
            b.round()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "oracle equivalence", criterion_1),
        (2, "delta-evaluation exactness", criterion_2),
        (3, "small benchmark rows", criterion_3),
        (4, "large instance at reduced budget", criterion_4),
        (5, "parameter sweep directions", criterion_5),
        (6, "invariant suite", criterion_6),
        (7, "reduction identities", criterion_7),
        (8, "accuracy arithmetic", criterion_8),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let strict = std::env::var("NODEMAP_REQUIRE_INSTANCES").is_ok_and(|v| v == "1");
    let mut failed = false;
    for (id, title, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let verdict = run();
        let secs = started.elapsed().as_secs_f64();
        let (label, detail) = match verdict {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed = true;
                ("FAIL", d)
            }
            Blocked(d) => {
                failed |= strict;
                ("BLOCKED", d)
            }
        };
        println!("{label:<7} criterion {id}: {title} ({detail}) [{secs:.1}s]");
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
