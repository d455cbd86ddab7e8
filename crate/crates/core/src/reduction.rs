//! Object-set reduction of a problem and the sufficiency check built on it.

use std::collections::BTreeSet;

use crate::planner::{plan, validate, PlannerConfig, PlannerError};
use crate::strips::{Goal, Problem, State, StripsError};

/// A set of objects of one problem.
pub type ObjectSubset = BTreeSet<String>;

/// Keeps the objects in `subset` and exactly those init atoms and goal
/// literals whose arguments all lie in it. Goal literals mentioning a dropped
/// object are dropped too.
pub fn reduce_problem(problem: &Problem, subset: &ObjectSubset) -> Result<Problem, StripsError> {
    if let Some(unknown) = subset.iter().find(|o| !problem.objects().contains_key(*o)) {
        return Err(StripsError::UnknownObject(unknown.clone()));
    }
    let keep = |args: &[String]| args.iter().all(|a| subset.contains(a));
    let objects = problem
        .objects()
        .iter()
        .filter(|(o, _)| subset.contains(*o))
        .map(|(o, t)| (o.clone(), t.clone()))
        .collect();
    let init: State = problem.init().iter().filter(|a| keep(&a.args)).cloned().collect();
    let goal = Goal::new(problem.goal().literals().filter(|l| keep(&l.atom.args)).cloned())
        .expect("a subset of a consistent goal is consistent");
    Ok(Problem::from_parts(
        problem.name.clone(),
        std::sync::Arc::clone(problem.domain()),
        objects,
        init,
        goal,
    ))
}

/// True iff planning on the reduction yields a plan that solves the original
/// problem. A timeout or an unsolvable reduction counts as insufficient.
pub fn is_sufficient(
    subset: &ObjectSubset,
    problem: &Problem,
    planner: &PlannerConfig,
) -> Result<bool, PlannerError> {
    let reduced = reduce_problem(problem, subset)
        .map_err(|e| PlannerError::Config(format!("bad object subset: {e}")))?;
    Ok(match plan(&reduced, planner)?.outcome.plan() {
        Some(found) => validate(found, problem),
        None => false,
    })
}
