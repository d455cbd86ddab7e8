//! Adapter for planners run as a subprocess.
//!
//! The domain and problem are written to a scratch directory (under
//! `$PLOI_WORKDIR` when set), the placeholders of the command template are
//! substituted and the command runs under `sh -c` in its own process group.

use std::os::unix::process::CommandExt;
use std::path::Path;
use std::process::{Command, Stdio};

use wait_timeout::ChildExt;
use web_time::Instant;

use super::{Outcome, PlanResult, PlanStats, PlannerConfig, PlannerError};
use crate::strips::{parse_plan, print_domain, print_problem, Problem};

pub const WORKDIR_ENV: &str = "PLOI_WORKDIR";

fn quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}

pub fn plan_external(problem: &Problem, config: &PlannerConfig) -> Result<PlanResult, PlannerError> {
    let template = config
        .external_command
        .as_deref()
        .ok_or_else(|| PlannerError::Config("external mode needs a command template".into()))?;
    let start = Instant::now();
    let scratch = match std::env::var_os(WORKDIR_ENV) {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            tempfile::Builder::new().prefix("ploi-").tempdir_in(dir)?
        }
        None => tempfile::Builder::new().prefix("ploi-").tempdir()?,
    };
    let domain_path = scratch.path().join("domain.pddl");
    let problem_path = scratch.path().join("problem.pddl");
    let plan_path = scratch.path().join("plan.txt");
    std::fs::write(&domain_path, print_domain(problem.domain()))?;
    std::fs::write(&problem_path, print_problem(problem))?;
    let command = template
        .replace("{domain}", &quote(&domain_path))
        .replace("{problem}", &quote(&problem_path))
        .replace("{plan-out}", &quote(&plan_path));

    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .current_dir(scratch.path())
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .process_group(0)
        .spawn()
        .map_err(|e| PlannerError::Launch(format!("{command}: {e}")))?;
    let status = child
        .wait_timeout(config.timeout)
        .map_err(|e| PlannerError::Launch(e.to_string()))?;
    let mut stats = PlanStats::default();
    let Some(status) = status else {
        // Take down the whole group so grandchildren of `sh` die too.
        let _ = Command::new("kill")
            .args(["-KILL", "--", &format!("-{}", child.id())])
            .stderr(Stdio::null())
            .status();
        let _ = child.kill();
        let _ = child.wait();
        stats.search_time_s = start.elapsed().as_secs_f64();
        return Ok(PlanResult {
            outcome: Outcome::Timeout,
            stats,
        });
    };
    stats.search_time_s = start.elapsed().as_secs_f64();
    let outcome = match std::fs::read_to_string(&plan_path) {
        Ok(text) => {
            let plan = parse_plan(&text, problem)
                .map_err(|(line, message)| PlannerError::Protocol { line, message })?;
            Outcome::Solved(plan)
        }
        Err(_) if status.success() => return Err(PlannerError::NoPlan),
        Err(_) => Outcome::Unsolvable,
    };
    Ok(PlanResult { outcome, stats })
}
