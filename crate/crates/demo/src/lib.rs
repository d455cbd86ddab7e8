//! Browser bindings: generate a problem, label its objects, and plan with
//! the incremental loop. Each export takes and returns plain strings (PDDL or
//! JSON) so the page keeps no Rust-side state.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;
use wasm_bindgen::prelude::*;

use ploi::benchgen::{generate, Family, GeneratorSpec};
use ploi::importance::ImportanceModel;
use ploi::labeling::{greedy_label, RemovalOrder};
use ploi::planner::{validate, PlannerConfig};
use ploi::runtime::{neighbors_plan, ploi_plan, pure_plan, PloiConfig, Scorer};
use ploi::strips::{parse_domain, parse_problem, print_plan, print_problem, DomainModel, Problem};

const TIMEOUT: Duration = Duration::from_secs(20);

fn family(name: &str) -> Result<Family, String> {
    name.parse()
}

fn load(family_name: &str, problem_text: &str) -> Result<Problem, String> {
    let domain: DomainModel = parse_domain(family(family_name)?.domain_text()).map_err(|e| e.render("domain"))?;
    parse_problem(problem_text, &Arc::new(domain)).map_err(|e| e.render("problem"))
}

pub fn domain_pddl(family_name: &str) -> Result<String, String> {
    Ok(family(family_name)?.domain_text().to_string())
}

/// Rooms for gripper, locations for ferry; the other families ignore it.
pub fn generate_pddl(family_name: &str, size: usize, goal: usize, extraneous: usize, seed: u32) -> Result<String, String> {
    let family = family(family_name)?;
    let aux = match family {
        Family::Gripper => 3,
        Family::Ferry => 4,
        _ => 0,
    };
    let spec = GeneratorSpec {
        family,
        size,
        aux,
        goal_size: goal,
        extraneous,
        obstruct: family == Family::Blocks,
        seed: seed.into(),
    };
    generate(&spec).map(|p| print_problem(&p)).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct LabelReport {
    labels: BTreeMap<String, bool>,
    kept: usize,
    total: usize,
    planner_calls: usize,
    seconds: f64,
}

pub fn label_json(family_name: &str, problem_text: &str) -> Result<String, String> {
    let problem = load(family_name, problem_text)?;
    let l = greedy_label(&problem, &PlannerConfig::gbfs(TIMEOUT), RemovalOrder::Lexicographic).map_err(|e| e.to_string())?;
    let report = LabelReport {
        kept: l.positives().len(),
        total: l.labels.len(),
        labels: l.labels,
        planner_calls: l.planner_calls,
        seconds: l.wall_time_s,
    };
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

/// `method` is pure, ploi, random-score, constant or neighbors. `ploi` needs
/// `model_json`, a model file written by the CLI.
pub fn plan_json(
    family_name: &str,
    problem_text: &str,
    method: &str,
    gamma: f64,
    seed: u32,
    model_json: Option<String>,
) -> Result<String, String> {
    let problem = load(family_name, problem_text)?;
    let config = PloiConfig {
        gamma,
        ..PloiConfig::new(PlannerConfig::gbfs(TIMEOUT))
    };
    let scorer = match method {
        "pure" | "neighbors" => None,
        "random-score" | "random" => Some(Scorer::Random { seed: seed.into() }),
        "constant" => Some(Scorer::Constant(1.0)),
        "ploi" => {
            let text = model_json.ok_or("the ploi method needs a model file")?;
            let model = ImportanceModel::from_json(&text).map_err(|e| e.to_string())?;
            Some(Scorer::Learned(Arc::new(model)))
        }
        other => return Err(format!("unknown method `{other}`")),
    };
    let run = match (method, &scorer) {
        ("pure", _) => pure_plan(&problem, &config),
        ("neighbors", _) => neighbors_plan(&problem, &config),
        (_, Some(s)) => ploi_plan(&problem, s, &config),
        _ => unreachable!(),
    };
    let (result, trace) = run.map_err(|e| e.to_string())?;
    let scores = match &scorer {
        Some(s) => Some(s.scores(&problem).map_err(|e| e.to_string())?),
        None => None,
    };
    let plan = result.outcome.plan();
    let out = serde_json::json!({
        "outcome": result.outcome.label(),
        "plan": plan.map(print_plan),
        "valid": plan.map(|p| validate(p, &problem)),
        "scores": scores,
        "trace": trace,
    });
    Ok(out.to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = domainPddl)]
pub fn domain_pddl_js(family: &str) -> Result<String, JsError> {
    js(domain_pddl(family))
}

#[wasm_bindgen(js_name = generateProblem)]
pub fn generate_problem_js(family: &str, size: usize, goal: usize, extraneous: usize, seed: u32) -> Result<String, JsError> {
    js(generate_pddl(family, size, goal, extraneous, seed))
}

#[wasm_bindgen(js_name = labelObjects)]
pub fn label_objects_js(family: &str, problem: &str) -> Result<String, JsError> {
    js(label_json(family, problem))
}

#[wasm_bindgen(js_name = planProblem)]
pub fn plan_problem_js(
    family: &str,
    problem: &str,
    method: &str,
    gamma: f64,
    seed: u32,
    model: Option<String>,
) -> Result<String, JsError> {
    js(plan_json(family, problem, method, gamma, seed, model))
}

/// Parses a JSON string produced by one of the exports; handy in tests.
pub fn parse(text: &str) -> Value {
    serde_json::from_str(text).expect("exports return JSON")
}
