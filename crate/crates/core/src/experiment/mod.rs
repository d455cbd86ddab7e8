//! Benchmark runs: every (problem, method, seed) cell of a suite split under
//! one wall-clock budget, written as CSV rows, JSONL traces and a summary.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{mpsc, Arc};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

pub use report::{extras_csv, iterations_csv, read_rows, summarize, times_markdown, HistogramBin, MethodSummary, Summary, SweepPoint};

use crate::benchgen::{GeneratedProblem, Suite, SuiteError};
use crate::importance::{ImportanceError, ImportanceModel};
use crate::planner::{validate, Outcome, PlannerConfig};
use crate::runtime::{neighbors_plan, ploi_plan, pure_plan, PloiConfig, PloiTrace, RuntimeError, Scorer};
use crate::strips::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pure,
    Ploi,
    RandomScore,
    Neighbors,
    /// Incremental loop with every score 1; equivalent to pure planning.
    Constant,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Pure, Method::Ploi, Method::RandomScore, Method::Neighbors, Method::Constant];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pure => "pure",
            Method::Ploi => "ploi",
            Method::RandomScore => "random-score",
            Method::Neighbors => "neighbors",
            Method::Constant => "constant",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(Method::RandomScore),
            _ => Method::ALL
                .into_iter()
                .find(|m| m.name() == s)
                .ok_or_else(|| format!("unknown method `{s}` (expected pure, ploi, random-score, neighbors or constant)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    #[default]
    Test,
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split `{s}` (expected train or test)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: PathBuf,
    pub split: Split,
    pub methods: Vec<Method>,
    pub model: Option<PathBuf>,
    pub seeds: Vec<u64>,
    /// Per-cell wall budget; also the planner timeout.
    pub timeout_s: f64,
    pub gamma: f64,
    pub planner: PlannerConfig,
    pub output: PathBuf,
    pub jobs: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("model: {0}")]
    Model(#[from] ImportanceError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellOutcome {
    Solved,
    Failed,
    Timeout,
}

/// One CSV line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub domain: String,
    pub method: String,
    pub seed: u64,
    pub problem: String,
    pub objects: usize,
    pub extraneous: usize,
    pub outcome: CellOutcome,
    pub wall_time_s: f64,
    /// N of the successful planner call (hop radius for neighbors).
    pub iterations: Option<usize>,
    pub planner_calls: usize,
    pub objects_at_success: Option<usize>,
    pub plan_length: Option<usize>,
    pub error: Option<String>,
}

/// Runs one method on one problem and classifies the result. Runtime errors
/// become failed cells carrying the message.
pub fn run_cell(
    problem: &Problem,
    method: Method,
    seed: u64,
    model: Option<&Arc<ImportanceModel>>,
    config: &PloiConfig,
) -> (CellOutcome, f64, Option<PloiTrace>, Option<String>, Option<usize>) {
    let start = Instant::now();
    let result: Result<_, RuntimeError> = match method {
        Method::Pure => pure_plan(problem, config),
        Method::Neighbors => neighbors_plan(problem, config),
        Method::Ploi => match model {
            Some(m) => ploi_plan(problem, &Scorer::Learned(Arc::clone(m)), config),
            None => Err(RuntimeError::Config("ploi needs a model".into())),
        },
        Method::RandomScore => ploi_plan(problem, &Scorer::Random { seed }, config),
        Method::Constant => ploi_plan(problem, &Scorer::Constant(1.0), config),
    };
    let wall = start.elapsed().as_secs_f64();
    match result {
        Ok((res, mut trace)) => {
            trace.method = method.name().to_string();
            let outcome = match &res.outcome {
                Outcome::Solved(p) if validate(p, problem) => CellOutcome::Solved,
                Outcome::Timeout => CellOutcome::Timeout,
                _ => CellOutcome::Failed,
            };
            let len = res.outcome.plan().map(|p| p.len());
            (outcome, wall, Some(trace), None, len)
        }
        Err(e) => (CellOutcome::Failed, wall, None, Some(e.to_string()), None),
    }
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T, ExperimentError> {
    r.map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl ExperimentConfig {
    fn check(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.into()));
        if self.methods.is_empty() {
            return bad("no methods selected");
        }
        if self.seeds.is_empty() {
            return bad("no seeds given");
        }
        if self.methods.contains(&Method::Ploi) && self.model.is_none() {
            return bad("method ploi needs --model");
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return bad("timeout must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        Ok(())
    }

    fn ploi_config(&self) -> PloiConfig {
        let timeout = Duration::from_secs_f64(self.timeout_s);
        PloiConfig {
            gamma: self.gamma,
            planner: self.planner.with_timeout(timeout),
            max_wall_time: timeout,
        }
    }
}

struct Cell<'a> {
    problem: &'a GeneratedProblem,
    method: Method,
    seed: u64,
}

fn problem_id(file: &str) -> String {
    file.strip_suffix(".pddl").unwrap_or(file).to_string()
}

fn trace_lines(trace: &PloiTrace, seed: u64, problem: &str) -> String {
    let mut out = String::new();
    for line in trace.to_jsonl().lines() {
        let mut v: serde_json::Value = serde_json::from_str(line).expect("trace line is JSON");
        v["seed"] = seed.into();
        v["problem"] = problem.into();
        out += &v.to_string();
        out.push('\n');
    }
    out
}

pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Summary,
}

/// Runs every cell, appending rows and traces to `output` as they finish,
/// then rewrites both files in cell order and writes `summary.json`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, ExperimentError> {
    cfg.check()?;
    let suite = Suite::load(&cfg.suite)?;
    let domain = suite.manifest.family.domain();
    let model = match &cfg.model {
        Some(path) if cfg.methods.contains(&Method::Ploi) => {
            let m = ImportanceModel::load(path)?;
            let suite_domain = suite
                .train
                .iter()
                .chain(&suite.test)
                .next()
                .map(|p| Arc::clone(p.problem.domain()))
                .unwrap_or(domain);
            m.check_domain(&suite_domain)?;
            Some(Arc::new(m))
        }
        _ => None,
    };
    let problems = match cfg.split {
        Split::Train => &suite.train,
        Split::Test => &suite.test,
    };
    let mut cells = Vec::new();
    for p in problems {
        for &method in &cfg.methods {
            for &seed in &cfg.seeds {
                cells.push(Cell { problem: p, method, seed });
            }
        }
    }
    let ploi_cfg = cfg.ploi_config();
    let family = suite.manifest.family.name().to_string();

    io(&cfg.output, std::fs::create_dir_all(&cfg.output))?;
    io(
        &cfg.output.join("config.json"),
        std::fs::write(
            cfg.output.join("config.json"),
            serde_json::to_string_pretty(cfg).expect("config serializes") + "\n",
        ),
    )?;
    let results_path = cfg.output.join("results.csv");
    let traces_path = cfg.output.join("traces.jsonl");
    let csv_err = |source| ExperimentError::Csv {
        path: results_path.clone(),
        source,
    };
    let mut writer = csv::Writer::from_path(&results_path).map_err(csv_err)?;
    let mut traces = io(&traces_path, std::fs::File::create(&traces_path))?;

    let run = |cell: &Cell| -> (ResultRow, String) {
        let (outcome, wall, trace, error, plan_length) =
            run_cell(&cell.problem.problem, cell.method, cell.seed, model.as_ref(), &ploi_cfg);
        let id = problem_id(&cell.problem.entry.file);
        let success = trace
            .as_ref()
            .filter(|_| outcome == CellOutcome::Solved)
            .and_then(|t| t.records.iter().find(|r| Some(r.n) == t.success_n && r.valid == Some(true)));
        let row = ResultRow {
            domain: family.clone(),
            method: cell.method.name().to_string(),
            seed: cell.seed,
            problem: id.clone(),
            objects: cell.problem.problem.num_objects(),
            extraneous: cell.problem.entry.spec.extraneous,
            outcome,
            wall_time_s: wall,
            iterations: success.map(|r| r.n),
            planner_calls: trace.as_ref().map_or(0, |t| t.planner_calls()),
            objects_at_success: success.map(|r| r.objects),
            plan_length,
            error,
        };
        if let Some(e) = &row.error {
            log::warn!("{} {} seed {}: {e}", row.problem, row.method, row.seed);
        }
        let lines = trace.map(|t| trace_lines(&t, cell.seed, &id)).unwrap_or_default();
        (row, lines)
    };

    let mut done: Vec<Option<(ResultRow, String)>> = vec![None; cells.len()];
    let mut record = |i: usize, row: ResultRow, lines: String| -> Result<(), ExperimentError> {
        log::info!(
            "[{}/{}] {} {} seed {}: {:?} in {:.3}s",
            i + 1,
            cells.len(),
            row.problem,
            row.method,
            row.seed,
            row.outcome,
            row.wall_time_s
        );
        writer.serialize(&row).map_err(csv_err)?;
        io(&results_path, writer.flush())?;
        io(&traces_path, traces.write_all(lines.as_bytes()))?;
        done[i] = Some((row, lines));
        Ok(())
    };

    if cfg.jobs == 1 {
        for (i, cell) in cells.iter().enumerate() {
            let (row, lines) = run(cell);
            record(i, row, lines)?;
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        std::thread::scope(|scope| -> Result<(), ExperimentError> {
            let (tx, rx) = mpsc::channel();
            for _ in 0..cfg.jobs.min(cells.len()) {
                let tx = tx.clone();
                let (next, cells, run) = (&next, &cells, &run);
                scope.spawn(move || loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    let Some(cell) = cells.get(i) else { break };
                    let (row, lines) = run(cell);
                    if tx.send((i, row, lines)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for (i, row, lines) in rx {
                record(i, row, lines)?;
            }
            Ok(())
        })?;
    }
    drop(writer);
    drop(traces);

    let (rows, lines): (Vec<ResultRow>, Vec<String>) = done.into_iter().map(|d| d.expect("every cell ran")).unzip();
    let mut writer = csv::Writer::from_path(&results_path).map_err(csv_err)?;
    for row in &rows {
        writer.serialize(row).map_err(csv_err)?;
    }
    io(&results_path, writer.flush())?;
    io(&traces_path, std::fs::write(&traces_path, lines.concat()))?;

    let summary = summarize(&rows, cfg.timeout_s);
    let summary_path = cfg.output.join("summary.json");
    io(
        &summary_path,
        std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"),
    )?;
    Ok(RunOutput { rows, summary })
}
