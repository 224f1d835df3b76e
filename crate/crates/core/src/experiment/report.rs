use std::fmt::Write as _;

use super::{BenchReport, FailureRecord, RunRecord};
use crate::error::{Error, Result};
use crate::orchestrator::Algorithm;

pub const CSV_HEADER: [&str; 7] = ["instance", "algorithm", "param_snapshot", "seed", "F", "A1", "seconds"];

const AGG_MARKER: &str = "AGG";
const ERR_MARKER: &str = "ERR";

fn fmt_accuracy(a: Option<f64>) -> String {
    a.map(|v| format!("{v:.2}")).unwrap_or_default()
}

/// CSV with one row per record, then one `AGG` row per aggregate (mean F,
/// mean A1, mean seconds), then one `ERR` row per failure.
pub fn emit_csv(report: &BenchReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for r in report.records() {
        writer.write_record([
            r.instance.as_str(),
            r.algorithm.tag(),
            r.params.as_str(),
            &r.seed.to_string(),
            &r.objective.to_string(),
            &fmt_accuracy(r.accuracy),
            &format!("{:.6}", r.seconds),
        ])?;
    }
    for a in report.aggregates() {
        writer.write_record([
            a.instance.as_str(),
            a.algorithm.tag(),
            a.params.as_str(),
            AGG_MARKER,
            &format!("{:.2}", a.mean_objective),
            &fmt_accuracy(a.mean_accuracy),
            &format!("{:.6}", a.mean_seconds),
        ])?;
    }
    for f in report.failures() {
        writer.write_record([
            f.instance.as_str(),
            f.algorithm.map_or("", Algorithm::tag),
            f.message.as_str(),
            ERR_MARKER,
            "",
            "",
            "",
        ])?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads back the per-run and failure rows written by [`emit_csv`]; `AGG` rows
/// are skipped since they are derived from the runs.
pub fn parse_csv(text: &str) -> Result<BenchReport> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let bad = |msg: String| Error::InvalidParameter(format!("csv: {msg}"));
    let mut report = BenchReport::new();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        match field(3) {
            AGG_MARKER => continue,
            ERR_MARKER => report.push_failure(FailureRecord {
                instance: field(0).to_string(),
                algorithm: field(1).parse().ok(),
                message: field(2).to_string(),
            }),
            seed => report.push(RunRecord {
                instance: field(0).to_string(),
                algorithm: field(1).parse()?,
                params: field(2).to_string(),
                seed: seed.parse().map_err(|_| bad(format!("seed `{seed}`")))?,
                objective: field(4).parse().map_err(|_| bad(format!("F `{}`", field(4))))?,
                accuracy: match field(5) {
                    "" => None,
                    a => Some(a.parse().map_err(|_| bad(format!("A1 `{a}`")))?),
                },
                seconds: field(6).parse().map_err(|_| bad(format!("seconds `{}`", field(6))))?,
            }),
        }
    }
    Ok(report)
}

/// Plain-text summary: one line per aggregate with mean and best objective,
/// mean time in minutes and mean accuracy.
pub fn format_table(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<10} {:>4} {:>14} {:>12} {:>10} {:>10} {:>9} {:>10}",
        "instance", "algorithm", "runs", "mean F", "best F", "T (s)", "T (min)", "A1 (%)", "F0"
    );
    for a in report.aggregates() {
        let _ = writeln!(
            out,
            "{:<12} {:<10} {:>4} {:>14.2} {:>12} {:>10.3} {:>10.4} {:>9} {:>10}",
            a.instance,
            a.algorithm.tag(),
            a.runs,
            a.mean_objective,
            a.min_objective,
            a.mean_seconds,
            a.mean_seconds / 60.0,
            a.mean_accuracy.map_or_else(|| "-".to_string(), |v| format!("{v:.2}")),
            a.known_optimum.map_or_else(|| "-".to_string(), |v| v.to_string()),
        );
    }
    for f in report.failures() {
        let _ = writeln!(
            out,
            "{:<12} {:<10} FAILED: {}",
            f.instance,
            f.algorithm.map_or("-", Algorithm::tag),
            f.message
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64, objective: i64) -> RunRecord {
        RunRecord {
            instance: "tai27e01".into(),
            algorithm: Algorithm::Composite,
            params: "max_neighbors=50;schedule=cauchy;workers=4".into(),
            seed,
            objective,
            accuracy: Some(100.0 * (objective - 2558) as f64 / 2558.0),
            seconds: 0.123456,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let text = emit_csv(&BenchReport::new()).unwrap();
        assert_eq!(text, "instance,algorithm,param_snapshot,seed,F,A1,seconds\n");
    }

    #[test]
    fn single_record_gives_header_row_and_aggregate() {
        let mut report = BenchReport::new();
        report.push(record(1, 2600));
        let text = emit_csv(&report).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(
            lines[1],
            "tai27e01,composite,max_neighbors=50;schedule=cauchy;workers=4,1,2600,1.64,0.123456"
        );
        assert!(lines[2].contains(",AGG,2600.00,1.64,"));
        let records_only: Vec<&str> = lines.iter().copied().filter(|l| !l.contains(",AGG,")).collect();
        assert_eq!(records_only.len(), 2);
    }

    #[test]
    fn csv_parses_back() {
        let mut report = BenchReport::new();
        for (seed, f) in [(3, 2558), (4, 2710), (5, 2600)] {
            report.push(record(seed, f));
        }
        report.push(RunRecord {
            instance: "a,b \"quoted\"".into(),
            algorithm: Algorithm::Annealing,
            params: String::new(),
            seed: u64::MAX,
            objective: 0,
            accuracy: None,
            seconds: 12.5,
        });
        report.push_failure(FailureRecord {
            instance: "missing".into(),
            algorithm: Some(Algorithm::Genetic),
            message: "failed to read missing.dat".into(),
        });
        let back = parse_csv(&emit_csv(&report).unwrap()).unwrap();
        assert_eq!(back.failures(), report.failures());
        assert_eq!(back.records().len(), report.records().len());
        for (a, b) in back.records().iter().zip(report.records()) {
            assert_eq!(
                (&a.instance, a.algorithm, &a.params, a.seed, a.objective),
                (&b.instance, b.algorithm, &b.params, b.seed, b.objective)
            );
            assert_eq!(
                a.accuracy.map(|v| (v * 100.0).round()),
                b.accuracy.map(|v| (v * 100.0).round())
            );
            assert!((a.seconds - b.seconds).abs() < 1e-6);
        }
    }

    #[test]
    fn table_lists_every_aggregate() {
        let mut report = BenchReport::new();
        report.push(record(1, 2600));
        report.push_failure(FailureRecord {
            instance: "x".into(),
            algorithm: None,
            message: "boom".into(),
        });
        let table = format_table(&report);
        assert!(table.contains("tai27e01") && table.contains("composite"));
        assert!(table.contains("FAILED: boom"));
    }
}
