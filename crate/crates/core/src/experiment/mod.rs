//! Repeated runs, aggregation and parameter sweeps.

mod oracle;
mod report;

use std::time::Instant;

pub use oracle::{brute_force_optimum, ORACLE_LIMIT};
pub use report::{emit_csv, format_table, parse_csv, CSV_HEADER};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mapping::accuracy;
use crate::orchestrator::{Algorithm, RunSetup, TUNABLES};
use crate::Cost;

/// Repetitions per experiment unless told otherwise.
pub const DEFAULT_REPETITIONS: usize = 10;

/// One solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub algorithm: Algorithm,
    pub params: String,
    pub seed: u64,
    pub objective: Cost,
    /// Percent excess over the known optimum, when one is registered.
    pub accuracy: Option<f64>,
    pub seconds: f64,
}

/// A run that could not be carried out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureRecord {
    pub instance: String,
    pub algorithm: Option<Algorithm>,
    pub message: String,
}

/// Summary of all records sharing instance, algorithm and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub instance: String,
    pub algorithm: Algorithm,
    pub params: String,
    pub runs: usize,
    pub mean_objective: f64,
    pub min_objective: Cost,
    pub mean_seconds: f64,
    pub mean_accuracy: Option<f64>,
    pub known_optimum: Option<Cost>,
}

/// Records of one or more experiments, in the order they ran.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    records: Vec<RunRecord>,
    failures: Vec<FailureRecord>,
    optima: Vec<(String, Cost)>,
}

impl BenchReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    pub fn failures(&self) -> &[FailureRecord] {
        &self.failures
    }

    pub fn push(&mut self, record: RunRecord) {
        self.records.push(record);
    }

    pub fn push_failure(&mut self, failure: FailureRecord) {
        self.failures.push(failure);
    }

    fn note_optimum(&mut self, instance: &Instance) {
        if let Some(f0) = instance.known_optimum() {
            if !self.optima.iter().any(|(name, _)| name == instance.name()) {
                self.optima.push((instance.name().to_string(), f0));
            }
        }
    }

    pub fn extend(&mut self, other: BenchReport) {
        self.records.extend(other.records);
        self.failures.extend(other.failures);
        for (name, f0) in other.optima {
            if !self.optima.iter().any(|(n, _)| *n == name) {
                self.optima.push((name, f0));
            }
        }
    }

    /// Aggregates grouped by (instance, algorithm, parameters), in order of
    /// first appearance.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut groups: Vec<(&str, Algorithm, &str, Vec<&RunRecord>)> = Vec::new();
        for rec in &self.records {
            match groups
                .iter_mut()
                .find(|(i, a, p, _)| *i == rec.instance && *a == rec.algorithm && *p == rec.params)
            {
                Some(group) => group.3.push(rec),
                None => groups.push((&rec.instance, rec.algorithm, &rec.params, vec![rec])),
            }
        }
        groups
            .into_iter()
            .map(|(instance, algorithm, params, recs)| {
                let runs = recs.len();
                let k = runs as f64;
                let accs: Vec<f64> = recs.iter().filter_map(|r| r.accuracy).collect();
                Aggregate {
                    instance: instance.to_string(),
                    algorithm,
                    params: params.to_string(),
                    runs,
                    mean_objective: recs.iter().map(|r| r.objective as f64).sum::<f64>() / k,
                    min_objective: recs.iter().map(|r| r.objective).min().unwrap_or_default(),
                    mean_seconds: recs.iter().map(|r| r.seconds).sum::<f64>() / k,
                    mean_accuracy: (accs.len() == runs).then(|| accs.iter().sum::<f64>() / k),
                    known_optimum: self.optima.iter().find(|(name, _)| name == instance).map(|&(_, f0)| f0),
                }
            })
            .collect()
    }
}

/// Runs `algorithm` `repetitions` times with seeds `seed, seed + 1, ...`,
/// timing only the solver call.
pub fn run_experiment(
    instance: &Instance,
    algorithm: Algorithm,
    setup: &RunSetup,
    repetitions: usize,
) -> Result<BenchReport> {
    if repetitions < 1 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    setup.validate_for(instance, algorithm)?;
    let params = setup.snapshot(algorithm);
    let mut report = BenchReport::new();
    report.note_optimum(instance);
    for rep in 0..repetitions {
        let mut run_setup = setup.clone();
        run_setup.config.seed = setup.config.seed.wrapping_add(rep as u64);
        let started = Instant::now();
        let outcome = run_setup.run(instance, algorithm)?;
        let seconds = started.elapsed().as_secs_f64();
        let accuracy = instance
            .known_optimum()
            .map(|f0| accuracy(outcome.best.objective, f0))
            .transpose()?;
        report.push(RunRecord {
            instance: instance.name().to_string(),
            algorithm,
            params: params.clone(),
            seed: run_setup.config.seed,
            objective: outcome.best.objective,
            accuracy,
            seconds,
        });
    }
    Ok(report)
}

/// One experiment per value of `parameter`, everything else held at `base`.
pub fn sweep_parameter(
    instance: &Instance,
    algorithm: Algorithm,
    base: &RunSetup,
    parameter: &str,
    values: &[String],
    repetitions: usize,
) -> Result<BenchReport> {
    if base.get(parameter).is_none() {
        return Err(Error::UnknownParameter {
            name: parameter.to_string(),
            valid: TUNABLES.join(", "),
        });
    }
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("no values given for `{parameter}`")));
    }
    let mut report = BenchReport::new();
    for value in values {
        let mut setup = base.clone();
        setup.set(parameter, value)?;
        report.extend(run_experiment(instance, algorithm, &setup, repetitions)?);
    }
    Ok(report)
}
