use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use nodemap_core::experiment::{emit_csv, format_table, FailureRecord, DEFAULT_REPETITIONS};
use nodemap_core::orchestrator::TUNABLES;
use nodemap_core::verify::run_verification;
use nodemap_core::{
    accuracy, find_instance, load_instance, run_experiment, sweep_parameter, Algorithm, BenchReport, Error, Instance,
    OptimaRegistry, RunSetup, INSTANCE_DIR_ENV,
};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_RUN: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "nodemap",
    version,
    about = "Map program graphs onto machine graphs with parallel SA, GA and composite heuristics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one instance and print the result.
    Solve {
        /// Instance file, or a name looked up in the instance directories.
        instance: String,
        #[arg(short, long, default_value = "sa")]
        algorithm: Algorithm,
        #[command(flatten)]
        run: RunArgs,
        /// Also print the process-to-node mapping.
        #[arg(long)]
        emit_mapping: bool,
    },
    /// Run repeated experiments over instances and algorithms.
    Bench {
        /// Instance files or names.
        #[arg(required = true)]
        instances: Vec<String>,
        /// Algorithms to run; all three when omitted.
        #[arg(short, long)]
        algorithm: Vec<Algorithm>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        reps: usize,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary one parameter, holding the rest fixed.
    Sweep {
        instance: String,
        #[arg(short, long, default_value = "sa")]
        algorithm: Algorithm,
        /// Parameter to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the objective, delta evaluation and solvers against exhaustive search.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print instance statistics and its registry entry.
    Info { instance: String },
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Worker count; defaults to the number of logical CPUs, capped at n.
    #[arg(short, long)]
    workers: Option<usize>,
    /// Master seed.
    #[arg(short, long, default_value_t = 1)]
    seed: u64,
    /// Override a tunable, `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// File of `key = value` lines; `--set` and `--workers` win over it.
    #[arg(long)]
    config: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn run(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUN,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::UnknownParameter { .. } | Error::PopulationTooSmall { .. } => {
                Failure::usage(e.to_string())
            }
            _ => Failure::input(e.to_string()),
        }
    }
}

fn instance_dirs() -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    if let Some(dir) = std::env::var_os(INSTANCE_DIR_ENV) {
        dirs.push(PathBuf::from(dir));
    }
    dirs.push(PathBuf::from("data/taillard"));
    dirs
}

fn open_instance(query: &str) -> Result<Instance, Failure> {
    let path = find_instance(query, &instance_dirs()).ok_or_else(|| {
        Failure::input(format!(
            "instance `{query}` not found (checked the path, ${INSTANCE_DIR_ENV} and data/taillard)"
        ))
    })?;
    Ok(load_instance(&path)?)
}

fn build_setup(instance: &Instance, args: &RunArgs) -> Result<RunSetup, Failure> {
    let mut setup = RunSetup::for_instance(instance, args.seed);
    if let Some(path) = &args.config {
        let text =
            fs::read_to_string(path).map_err(|e| Failure::input(format!("failed to read {}: {e}", path.display())))?;
        setup.apply_config_text(&text)?;
    }
    for pair in &args.overrides {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--set expects key=value, found `{pair}`")))?;
        setup.set(key.trim(), value.trim())?;
    }
    if let Some(workers) = args.workers {
        setup.config.workers = workers;
    }
    Ok(setup)
}

fn write_output(out: Option<&Path>, csv: &str, table: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| Failure::input(format!("failed to write {}: {e}", path.display())))?;
            print!("{table}");
        }
        None => {
            print!("{csv}");
            eprint!("{table}");
        }
    }
    let _ = std::io::stdout().flush();
    Ok(())
}

fn cmd_solve(query: &str, algorithm: Algorithm, run: &RunArgs, emit_mapping: bool) -> Result<(), Failure> {
    let instance = open_instance(query)?;
    let setup = build_setup(&instance, run)?;
    setup.validate_for(&instance, algorithm)?;
    let started = Instant::now();
    let outcome = setup
        .run(&instance, algorithm)
        .map_err(|e| Failure::run(format!("{algorithm} failed: {e}")))?;
    let seconds = started.elapsed().as_secs_f64();
    let best = outcome.best;
    println!("instance  {} (n = {})", instance.name(), instance.n());
    println!("algorithm {algorithm}");
    println!("workers   {}", setup.config.workers);
    println!("seed      {}", setup.config.seed);
    println!("F         {}", best.objective);
    if let Some(f0) = instance.known_optimum() {
        println!("F0        {f0}");
        println!("A1        {:.2}%", accuracy(best.objective, f0)?);
        if best.objective < f0 {
            eprintln!("warning: F = {} is below the registered optimum {f0}", best.objective);
        }
    }
    println!("seconds   {seconds:.3}");
    if emit_mapping {
        println!("mapping   {}", best.mapping);
    }
    Ok(())
}

fn cmd_bench(
    queries: &[String],
    algorithms: &[Algorithm],
    run: &RunArgs,
    reps: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if reps < 1 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let algorithms = if algorithms.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        algorithms.to_vec()
    };
    let mut report = BenchReport::new();
    let mut failed = 0;
    for query in queries {
        let instance = match open_instance(query) {
            Ok(i) => i,
            Err(f) => {
                eprintln!("error: {}", f.message);
                report.push_failure(FailureRecord {
                    instance: query.clone(),
                    algorithm: None,
                    message: f.message,
                });
                failed += 1;
                continue;
            }
        };
        for &algorithm in &algorithms {
            let result =
                build_setup(&instance, run).and_then(|setup| Ok(run_experiment(&instance, algorithm, &setup, reps)?));
            match result {
                Ok(part) => report.extend(part),
                Err(f) => {
                    eprintln!("error: {} {algorithm}: {}", instance.name(), f.message);
                    report.push_failure(FailureRecord {
                        instance: instance.name().to_string(),
                        algorithm: Some(algorithm),
                        message: f.message,
                    });
                    failed += 1;
                }
            }
        }
    }
    let csv = emit_csv(&report)?;
    write_output(out, &csv, &format_table(&report))?;
    if failed > 0 {
        return Err(Failure::run(format!("{failed} experiment(s) failed")));
    }
    Ok(())
}

fn cmd_sweep(
    query: &str,
    algorithm: Algorithm,
    param: &str,
    values: &[String],
    run: &RunArgs,
    reps: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let values: Vec<String> = values
        .iter()
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(Failure::usage(format!("no values given for `{param}`")));
    }
    let instance = open_instance(query)?;
    let base = build_setup(&instance, run)?;
    let report = sweep_parameter(&instance, algorithm, &base, param, &values, reps)?;
    write_output(out, &emit_csv(&report)?, &format_table(&report))
}

fn cmd_verify(seed: u64) -> Result<(), Failure> {
    match run_verification(seed) {
        Ok(report) => {
            for (property, cases) in &report.checks {
                println!("ok   {property} ({cases} cases)");
            }
            Ok(())
        }
        Err(failure) => Err(Failure::run(format!("verification failed: {failure}"))),
    }
}

fn cmd_info(query: &str) -> Result<(), Failure> {
    let instance = open_instance(query)?;
    let stats = instance.stats();
    println!("name        {}", instance.name());
    println!("order       {}", stats.n);
    println!("symmetric   {}", stats.symmetric);
    for (label, m) in [("distances", stats.distances), ("flows", stats.flows)] {
        println!("{label:<11} max {} sum {} nonzero {}", m.max, m.sum, m.nonzero);
    }
    match instance.known_optimum() {
        Some(f0) => println!("F0          {f0}"),
        None => println!("F0          unknown"),
    }
    let registry = OptimaRegistry::builtin();
    match registry.get(instance.name()) {
        Some(f0) => println!("registry    {} = {f0}", instance.name()),
        None => println!("registry    no builtin entry for {}", instance.name()),
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            instance,
            algorithm,
            run,
            emit_mapping,
        } => cmd_solve(&instance, algorithm, &run, emit_mapping),
        Command::Bench {
            instances,
            algorithm,
            run,
            reps,
            out,
        } => cmd_bench(&instances, &algorithm, &run, reps, out.as_deref()),
        Command::Sweep {
            instance,
            algorithm,
            param,
            values,
            run,
            reps,
            out,
        } => cmd_sweep(&instance, algorithm, &param, &values, &run, reps, out.as_deref()),
        Command::Verify { seed } => cmd_verify(seed),
        Command::Info { instance } => cmd_info(&instance),
    }
}

fn main() -> ExitCode {
    let tunables = format!(
        "Tunables for --set, --config and sweep --param:\n  {}\n\nExit codes: 0 success, 1 usage error, 2 input error, 3 run failure.",
        TUNABLES.join(", ")
    );
    let command = Cli::command()
        .after_help(tunables.clone())
        .mut_subcommands(|sub| sub.after_help(tunables.clone()));
    let cli = match command.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
