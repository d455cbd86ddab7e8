//! Built-in forward-search planners, the external planner adapter and plan
//! validation.

#[cfg(not(target_arch = "wasm32"))]
mod external;
mod search;
mod task;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::strips::{apply, holds, Plan, Problem};

#[cfg(not(target_arch = "wasm32"))]
pub use external::plan_external;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerMode {
    BuiltinGbfs,
    BuiltinBfs,
    External,
}

impl std::str::FromStr for PlannerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gbfs" | "builtin-gbfs" => Ok(PlannerMode::BuiltinGbfs),
            "bfs" | "builtin-bfs" => Ok(PlannerMode::BuiltinBfs),
            "external" => Ok(PlannerMode::External),
            _ => Err(format!("unknown planner mode `{s}` (expected gbfs, bfs or external)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub mode: PlannerMode,
    #[serde(with = "secs")]
    pub timeout: Duration,
    /// Shell command with `{domain}`, `{problem}` and `{plan-out}` placeholders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_command: Option<String>,
}

impl PlannerConfig {
    pub fn gbfs(timeout: Duration) -> Self {
        PlannerConfig {
            mode: PlannerMode::BuiltinGbfs,
            timeout,
            external_command: None,
        }
    }

    pub fn bfs(timeout: Duration) -> Self {
        PlannerConfig {
            mode: PlannerMode::BuiltinBfs,
            timeout,
            external_command: None,
        }
    }

    pub fn external(command: &str, timeout: Duration) -> Self {
        PlannerConfig {
            mode: PlannerMode::External,
            timeout,
            external_command: Some(command.to_string()),
        }
    }

    pub fn with_timeout(&self, timeout: Duration) -> Self {
        PlannerConfig {
            timeout,
            ..self.clone()
        }
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Solved(Plan),
    Unsolvable,
    Timeout,
}

impl Outcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Solved(_) => "solved",
            Outcome::Unsolvable => "unsolvable",
            Outcome::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub expanded: u64,
    pub generated: u64,
    pub ground_actions: u64,
    pub grounding_time_s: f64,
    pub search_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub outcome: Outcome,
    pub stats: PlanStats,
}

#[derive(Debug, thiserror::Error)]
pub enum PlannerError {
    #[error("invalid planner configuration: {0}")]
    Config(String),
    #[error("failed to launch external planner: {0}")]
    Launch(String),
    #[error("external planner protocol error at plan line {line}: {message}")]
    Protocol { line: usize, message: String },
    #[error("external planner exited successfully without writing a plan")]
    NoPlan,
    #[error("planner workspace I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Plans on `problem` as given. Grounding happens here, inside the timeout.
pub fn plan(problem: &Problem, config: &PlannerConfig) -> Result<PlanResult, PlannerError> {
    if config.timeout.is_zero() {
        return Err(PlannerError::Config("timeout must be positive".into()));
    }
    match config.mode {
        PlannerMode::BuiltinGbfs | PlannerMode::BuiltinBfs => Ok(plan_builtin(problem, config)),
        #[cfg(not(target_arch = "wasm32"))]
        PlannerMode::External => plan_external(problem, config),
        #[cfg(target_arch = "wasm32")]
        PlannerMode::External => Err(PlannerError::Config(
            "external planners are unavailable on this target".into(),
        )),
    }
}

fn plan_builtin(problem: &Problem, config: &PlannerConfig) -> PlanResult {
    let start = Instant::now();
    let deadline = start + config.timeout;
    let mut stats = PlanStats::default();
    let Ok(task) = task::Task::compile(problem, deadline) else {
        stats.grounding_time_s = start.elapsed().as_secs_f64();
        return PlanResult {
            outcome: Outcome::Timeout,
            stats,
        };
    };
    stats.ground_actions = task.actions.len() as u64;
    stats.grounding_time_s = start.elapsed().as_secs_f64();
    let search_start = Instant::now();
    let mut counters = search::SearchCounters::default();
    let found = match config.mode {
        PlannerMode::BuiltinBfs => search::bfs(&task, deadline, &mut counters),
        _ => search::gbfs(&task, deadline, &mut counters),
    };
    stats.search_time_s = search_start.elapsed().as_secs_f64();
    stats.expanded = counters.expanded;
    stats.generated = counters.generated;
    let outcome = match found {
        search::SearchOutcome::Solved(ids) => Outcome::Solved(task.to_plan(&ids)),
        search::SearchOutcome::Unsolvable => Outcome::Unsolvable,
        search::SearchOutcome::Timeout => Outcome::Timeout,
    };
    PlanResult { outcome, stats }
}

/// Simulates `plan` from the initial state of `problem`; true iff every step
/// applies and the final state satisfies the goal.
pub fn validate(plan: &Plan, problem: &Problem) -> bool {
    let mut state = problem.init().clone();
    for step in &plan.steps {
        if step.args.len() != step.schema.parameters.len() {
            return false;
        }
        match apply(&state, step) {
            Ok(next) => state = next,
            Err(_) => return false,
        }
    }
    holds(&state, problem.goal())
}
