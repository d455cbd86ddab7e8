//! Aggregates over result rows: the run summary, a per-domain time/failure
//! table, the iterations histogram and the extraneous-object series.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CellOutcome, ExperimentError, ResultRow};

pub const SUMMARY_FORMAT: &str = "ploi-summary";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub iterations: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub cells: usize,
    pub solved: usize,
    pub failed: usize,
    pub timeouts: usize,
    /// (failed + timeouts) / cells.
    pub failure_rate: f64,
    /// Over solved cells only.
    pub mean_time_s: Option<f64>,
    pub median_time_s: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub iterations_histogram: Vec<HistogramBin>,
}

/// Median wall time over every cell at one extraneous-object count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub method: String,
    pub extraneous: usize,
    pub cells: usize,
    pub solved: usize,
    pub median_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub domains: Vec<String>,
    pub timeout_s: f64,
    pub cells: usize,
    pub methods: Vec<MethodSummary>,
    /// Empty unless the rows span several extraneous counts.
    pub sweep: Vec<SweepPoint>,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Methods in order of first appearance.
fn methods(rows: &[ResultRow]) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::new();
    for r in rows {
        if !out.contains(&r.method.as_str()) {
            out.push(&r.method);
        }
    }
    out
}

fn method_summary(method: &str, rows: &[&ResultRow]) -> MethodSummary {
    let count = |o| rows.iter().filter(|r| r.outcome == o).count();
    let (solved, failed, timeouts) = (count(CellOutcome::Solved), count(CellOutcome::Failed), count(CellOutcome::Timeout));
    let mut times: Vec<f64> = rows
        .iter()
        .filter(|r| r.outcome == CellOutcome::Solved)
        .map(|r| r.wall_time_s)
        .collect();
    let iterations: Vec<usize> = rows
        .iter()
        .filter(|r| r.outcome == CellOutcome::Solved)
        .filter_map(|r| r.iterations)
        .collect();
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for &n in &iterations {
        *histogram.entry(n).or_default() += 1;
    }
    MethodSummary {
        method: method.to_string(),
        cells: rows.len(),
        solved,
        failed,
        timeouts,
        failure_rate: if rows.is_empty() {
            0.0
        } else {
            (failed + timeouts) as f64 / rows.len() as f64
        },
        mean_time_s: mean(&times),
        median_time_s: median(&mut times),
        mean_iterations: mean(&iterations.iter().map(|&n| n as f64).collect::<Vec<_>>()),
        iterations_histogram: histogram
            .into_iter()
            .map(|(iterations, count)| HistogramBin { iterations, count })
            .collect(),
    }
}

pub fn summarize(rows: &[ResultRow], timeout_s: f64) -> Summary {
    let mut domains: Vec<String> = rows.iter().map(|r| r.domain.clone()).collect();
    domains.sort();
    domains.dedup();
    let methods_in = methods(rows);
    let summaries = methods_in
        .iter()
        .map(|m| method_summary(m, &rows.iter().filter(|r| r.method == *m).collect::<Vec<_>>()))
        .collect();
    let mut levels: Vec<usize> = rows.iter().map(|r| r.extraneous).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut sweep = Vec::new();
    if levels.len() > 1 {
        for m in &methods_in {
            for &x in &levels {
                let cells: Vec<&ResultRow> = rows.iter().filter(|r| r.method == *m && r.extraneous == x).collect();
                let mut times: Vec<f64> = cells.iter().map(|r| r.wall_time_s).collect();
                if let Some(median_time_s) = median(&mut times) {
                    sweep.push(SweepPoint {
                        method: m.to_string(),
                        extraneous: x,
                        cells: cells.len(),
                        solved: cells.iter().filter(|r| r.outcome == CellOutcome::Solved).count(),
                        median_time_s,
                    });
                }
            }
        }
    }
    Summary {
        format: SUMMARY_FORMAT.into(),
        domains,
        timeout_s,
        cells: rows.len(),
        methods: summaries,
        sweep,
    }
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>, ExperimentError> {
    let err = |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(err)?;
    reader.deserialize().collect::<Result<Vec<ResultRow>, _>>().map_err(err)
}

/// One line per domain with mean solved time and failure rate per method.
pub fn times_markdown(rows: &[ResultRow]) -> String {
    let methods = methods(rows);
    let mut out = String::from("| Domain |");
    for m in &methods {
        let _ = write!(out, " {m} Time | {m} Fail |");
    }
    out += "\n|---|";
    out += &"---|---|".repeat(methods.len());
    out.push('\n');
    let mut domains: Vec<&str> = rows.iter().map(|r| r.domain.as_str()).collect();
    domains.sort_unstable();
    domains.dedup();
    for d in domains {
        let _ = write!(out, "| {d} |");
        for m in &methods {
            let cells: Vec<&ResultRow> = rows.iter().filter(|r| r.domain == d && r.method == *m).collect();
            if cells.is_empty() {
                out += " - | - |";
                continue;
            }
            let s = method_summary(m, &cells);
            match s.mean_time_s {
                Some(t) => {
                    let _ = write!(out, " {t:.2} |");
                }
                None => out += " - |",
            }
            let _ = write!(out, " {:.2} |", s.failure_rate);
        }
        out.push('\n');
    }
    out
}

/// `method,iterations,count` over solved cells.
pub fn iterations_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("method,iterations,count\n");
    for s in summarize(rows, 0.0).methods {
        for bin in s.iterations_histogram {
            let _ = writeln!(out, "{},{},{}", s.method, bin.iterations, bin.count);
        }
    }
    out
}

/// `method,extraneous,cells,solved,median_time_s`.
pub fn extras_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from("method,extraneous,cells,solved,median_time_s\n");
    for p in summarize(rows, 0.0).sweep {
        let _ = writeln!(out, "{},{},{},{},{:.6}", p.method, p.extraneous, p.cells, p.solved, p.median_time_s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, outcome: CellOutcome, time: f64, iterations: Option<usize>, extraneous: usize) -> ResultRow {
        ResultRow {
            domain: "gripper".into(),
            method: method.into(),
            seed: 0,
            problem: "test/p000".into(),
            objects: 10,
            extraneous,
            outcome,
            wall_time_s: time,
            iterations,
            planner_calls: iterations.unwrap_or(1),
            objects_at_success: None,
            plan_length: None,
            error: None,
        }
    }

    #[test]
    fn failure_rate_matches_recount() {
        let rows = vec![
            row("pure", CellOutcome::Solved, 1.0, None, 0),
            row("pure", CellOutcome::Timeout, 5.0, None, 0),
            row("pure", CellOutcome::Failed, 0.1, None, 0),
            row("ploi", CellOutcome::Solved, 0.5, Some(1), 0),
            row("ploi", CellOutcome::Solved, 0.7, Some(3), 0),
            row("ploi", CellOutcome::Solved, 0.2, Some(1), 0),
        ];
        let s = summarize(&rows, 5.0);
        assert_eq!(s.cells, 6);
        let pure = &s.methods[0];
        assert_eq!((pure.solved, pure.failed, pure.timeouts), (1, 1, 1));
        let recount = rows.iter().filter(|r| r.method == "pure" && r.outcome != CellOutcome::Solved).count();
        assert_eq!(pure.failure_rate, recount as f64 / 3.0);
        assert_eq!(pure.mean_time_s, Some(1.0));
        let ploi = &s.methods[1];
        assert_eq!(ploi.median_time_s, Some(0.5));
        assert_eq!(
            ploi.iterations_histogram,
            vec![HistogramBin { iterations: 1, count: 2 }, HistogramBin { iterations: 3, count: 1 }]
        );
        assert!(s.sweep.is_empty());
        assert_eq!(iterations_csv(&rows), "method,iterations,count\nploi,1,2\nploi,3,1\n");
    }

    #[test]
    fn empty_rows_give_empty_tables() {
        let s = summarize(&[], 1.0);
        assert!(s.methods.is_empty() && s.sweep.is_empty() && s.domains.is_empty());
        assert_eq!(times_markdown(&[]), "| Domain |\n|---|\n");
        assert_eq!(iterations_csv(&[]), "method,iterations,count\n");
        assert_eq!(extras_csv(&[]), "method,extraneous,cells,solved,median_time_s\n");
    }

    #[test]
    fn table_has_time_and_fail_columns() {
        let rows = vec![
            row("pure", CellOutcome::Solved, 2.0, None, 0),
            row("ploi", CellOutcome::Timeout, 9.0, None, 0),
        ];
        let table = times_markdown(&rows);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "| Domain | pure Time | pure Fail | ploi Time | ploi Fail |");
        assert_eq!(lines[2], "| gripper | 2.00 | 0.00 | - | 1.00 |");
    }

    #[test]
    fn sweep_medians_per_level() {
        let rows = vec![
            row("pure", CellOutcome::Solved, 1.0, None, 0),
            row("pure", CellOutcome::Solved, 3.0, None, 0),
            row("pure", CellOutcome::Solved, 2.0, None, 0),
            row("pure", CellOutcome::Timeout, 10.0, None, 50),
        ];
        let s = summarize(&rows, 10.0);
        assert_eq!(s.sweep.len(), 2);
        assert_eq!(s.sweep[0].median_time_s, 2.0);
        assert_eq!(s.sweep[1].median_time_s, 10.0);
        assert_eq!(s.sweep[1].solved, 0);
        assert!(extras_csv(&rows).contains("pure,50,1,0,10.000000"));
    }
}
