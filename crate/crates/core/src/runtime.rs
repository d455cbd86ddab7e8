//! Incremental planning over growing object sets, driven by per-object
//! scores, plus the graph-neighborhood baseline.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::importance::{score_objects, ImportanceError, ImportanceModel};
use crate::planner::{plan, validate, Outcome, PlanResult, PlanStats, PlannerConfig, PlannerError};
use crate::reduction::{reduce_problem, ObjectSubset};
use crate::strips::Problem;

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Importance(#[from] ImportanceError),
}

#[derive(Debug, Clone)]
pub enum Scorer {
    Learned(Arc<ImportanceModel>),
    /// Independent uniform scores on (0, 1), fixed by the seed and problem.
    Random { seed: u64 },
    Constant(f64),
    /// Explicit scores; every object must be listed.
    Fixed(BTreeMap<String, f64>),
}

/// FNV-1a, used to derive a per-problem stream for the random scorer.
fn fnv(text: &str) -> u64 {
    text.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl Scorer {
    pub fn describe(&self) -> String {
        match self {
            Scorer::Learned(m) => format!("learned ({} domain, K={})", m.meta.domain, m.dims.iterations),
            Scorer::Random { seed } => format!("random (seed {seed})"),
            Scorer::Constant(v) => format!("constant {v}"),
            Scorer::Fixed(m) => format!("fixed ({} objects)", m.len()),
        }
    }

    /// Scores in (0, 1] for every object; goal objects score 1.
    pub fn scores(&self, problem: &Problem) -> Result<BTreeMap<String, f64>, RuntimeError> {
        let mut scores = match self {
            Scorer::Learned(model) => score_objects(model, problem)?,
            Scorer::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv(&problem.name));
                problem
                    .object_names()
                    .map(|o| {
                        let mut s = 0.0;
                        while s == 0.0 {
                            s = rng.random::<f64>();
                        }
                        (o.to_string(), s)
                    })
                    .collect()
            }
            Scorer::Constant(v) => problem.object_names().map(|o| (o.to_string(), *v)).collect(),
            Scorer::Fixed(map) => {
                let mut out = BTreeMap::new();
                for o in problem.object_names() {
                    let s = map
                        .get(o)
                        .ok_or_else(|| RuntimeError::Config(format!("no score for object `{o}`")))?;
                    out.insert(o.to_string(), *s);
                }
                out
            }
        };
        if let Some((o, s)) = scores.iter().find(|(_, s)| !(**s > 0.0 && **s <= 1.0)) {
            return Err(RuntimeError::Config(format!("score {s} for `{o}` is outside (0, 1]")));
        }
        for o in problem.goal().objects() {
            scores.insert(o.to_string(), 1.0);
        }
        Ok(scores)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PloiConfig {
    pub gamma: f64,
    pub planner: PlannerConfig,
    #[serde(with = "secs")]
    pub max_wall_time: Duration,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Duration::try_from_secs_f64(f64::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

impl PloiConfig {
    pub fn new(planner: PlannerConfig) -> Self {
        PloiConfig {
            gamma: 0.9,
            max_wall_time: planner.timeout,
            planner,
        }
    }

    fn check(&self) -> Result<(), RuntimeError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(RuntimeError::Config(format!("gamma {} must lie in (0, 1)", self.gamma)));
        }
        if self.max_wall_time.is_zero() {
            return Err(RuntimeError::Config("max wall time must be positive".into()));
        }
        Ok(())
    }
}

/// One planner call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// Threshold exponent, or hop radius for the neighbors baseline.
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub objects: usize,
    pub outcome: String,
    /// Whether the plan solves the original problem; absent without a plan.
    pub valid: Option<bool>,
    pub plan_length: Option<usize>,
    /// Seconds since the run started.
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PloiTrace {
    pub method: String,
    pub problem: String,
    pub total_objects: usize,
    pub scoring_time_s: f64,
    pub records: Vec<IterationRecord>,
    /// `n` of the record whose plan was returned.
    pub success_n: Option<usize>,
    pub fell_back: bool,
    pub total_time_s: f64,
}

impl PloiTrace {
    fn new(method: &str, problem: &Problem) -> Self {
        PloiTrace {
            method: method.to_string(),
            problem: problem.name.clone(),
            total_objects: problem.num_objects(),
            scoring_time_s: 0.0,
            records: Vec::new(),
            success_n: None,
            fell_back: false,
            total_time_s: 0.0,
        }
    }

    pub fn planner_calls(&self) -> usize {
        self.records.len()
    }

    /// One JSON object per planner call, tagged with method and problem.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            method: &'a str,
            problem: &'a str,
            #[serde(flatten)]
            record: &'a IterationRecord,
        }
        let mut out = String::new();
        for record in &self.records {
            let line = Line {
                method: &self.method,
                problem: &self.problem,
                record,
            };
            out += &serde_json::to_string(&line).expect("record serializes");
            out.push('\n');
        }
        out
    }
}

fn add_stats(total: &mut PlanStats, s: &PlanStats) {
    total.expanded += s.expanded;
    total.generated += s.generated;
    total.ground_actions += s.ground_actions;
    total.grounding_time_s += s.grounding_time_s;
    total.search_time_s += s.search_time_s;
}

enum Step {
    Done(Outcome),
    Continue,
}

/// Shared bookkeeping for both incremental methods.
struct Run<'a> {
    problem: &'a Problem,
    config: &'a PloiConfig,
    start: Instant,
    stats: PlanStats,
    trace: PloiTrace,
}

impl<'a> Run<'a> {
    fn new(method: &str, problem: &'a Problem, config: &'a PloiConfig) -> Self {
        Run {
            problem,
            config,
            start: Instant::now(),
            stats: PlanStats::default(),
            trace: PloiTrace::new(method, problem),
        }
    }

    fn remaining(&self) -> Option<Duration> {
        self.config
            .max_wall_time
            .checked_sub(self.start.elapsed())
            .filter(|d| !d.is_zero())
    }

    /// Plans on the reduction to `subset`. A plan found on a strict subset is
    /// only accepted if it solves the original problem; on the full set the
    /// planner's answer is final.
    fn attempt(&mut self, n: usize, threshold: Option<f64>, subset: &ObjectSubset) -> Result<Step, RuntimeError> {
        let Some(budget) = self.remaining() else {
            return Ok(Step::Done(Outcome::Timeout));
        };
        let full = subset.len() == self.problem.num_objects();
        let reduced = reduce_problem(self.problem, subset).map_err(|e| RuntimeError::Config(e.to_string()))?;
        let result = plan(&reduced, &self.config.planner.with_timeout(budget))?;
        add_stats(&mut self.stats, &result.stats);
        let valid = result.outcome.plan().map(|p| full || validate(p, self.problem));
        self.trace.records.push(IterationRecord {
            n,
            threshold,
            objects: subset.len(),
            outcome: result.outcome.label().to_string(),
            valid,
            plan_length: result.outcome.plan().map(|p| p.len()),
            elapsed_s: self.start.elapsed().as_secs_f64(),
        });
        if valid == Some(true) || full {
            if result.outcome.plan().is_some() {
                self.trace.success_n = Some(n);
            }
            return Ok(Step::Done(result.outcome));
        }
        if result.outcome == Outcome::Timeout {
            return Ok(Step::Done(Outcome::Timeout));
        }
        Ok(Step::Continue)
    }

    fn finish(mut self, outcome: Outcome) -> (PlanResult, PloiTrace) {
        self.trace.total_time_s = self.start.elapsed().as_secs_f64();
        (
            PlanResult {
                outcome,
                stats: self.stats,
            },
            self.trace,
        )
    }
}

/// Plans on the objects scoring at least `gamma^N` for N = 1, 2, ..., calling
/// the planner only when that set changes, until a plan for the reduced
/// problem also solves the original or the set covers every object.
pub fn ploi_plan(problem: &Problem, scorer: &Scorer, config: &PloiConfig) -> Result<(PlanResult, PloiTrace), RuntimeError> {
    config.check()?;
    let mut run = Run::new("ploi", problem, config);
    run.trace.method = match scorer {
        Scorer::Learned(_) => "ploi",
        Scorer::Random { .. } => "random",
        Scorer::Constant(_) => "constant",
        Scorer::Fixed(_) => "fixed",
    }
    .to_string();
    let scores = scorer.scores(problem)?;
    run.trace.scoring_time_s = run.start.elapsed().as_secs_f64();

    let mut previous: Option<ObjectSubset> = None;
    let mut n = 0;
    loop {
        n += 1;
        let threshold = config.gamma.powi(n as i32);
        let subset: ObjectSubset = scores
            .iter()
            .filter(|(_, s)| **s >= threshold)
            .map(|(o, _)| o.clone())
            .collect();
        if previous.as_ref() == Some(&subset) {
            continue;
        }
        if let Step::Done(outcome) = run.attempt(n, Some(threshold), &subset)? {
            return Ok(run.finish(outcome));
        }
        previous = Some(subset);
    }
}

/// Plans on goal objects plus everything within L hops of them in the graph
/// of binary init relations, for L = 0, 1, ...; once the set stops growing it
/// plans on the full problem.
pub fn neighbors_plan(problem: &Problem, config: &PloiConfig) -> Result<(PlanResult, PloiTrace), RuntimeError> {
    config.check()?;
    let mut run = Run::new("neighbors", problem, config);
    let hops = hop_distances(problem);
    run.trace.scoring_time_s = run.start.elapsed().as_secs_f64();

    let mut previous: Option<ObjectSubset> = None;
    for radius in 0.. {
        let subset: ObjectSubset = hops
            .iter()
            .filter(|(_, d)| **d <= radius)
            .map(|(o, _)| o.to_string())
            .collect();
        if previous.as_ref() == Some(&subset) {
            let everything: ObjectSubset = problem.object_names().map(String::from).collect();
            run.trace.fell_back = true;
            let Step::Done(outcome) = run.attempt(radius, None, &everything)? else {
                unreachable!("planning on the full problem always finishes the run")
            };
            return Ok(run.finish(outcome));
        }
        if let Step::Done(outcome) = run.attempt(radius, None, &subset)? {
            return Ok(run.finish(outcome));
        }
        previous = Some(subset);
    }
    unreachable!()
}

/// Hop distance from the nearest goal object, for reachable objects only.
pub fn hop_distances(problem: &Problem) -> BTreeMap<&str, usize> {
    let mut adjacent: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for atom in problem.init().iter().filter(|a| a.args.len() == 2 && a.args[0] != a.args[1]) {
        let (a, b) = (atom.args[0].as_str(), atom.args[1].as_str());
        adjacent.entry(a).or_default().insert(b);
        adjacent.entry(b).or_default().insert(a);
    }
    let goal = problem.goal().objects();
    let mut dist: BTreeMap<&str, usize> = goal.iter().map(|o| (*o, 0)).collect();
    let mut queue: VecDeque<&str> = goal.into_iter().collect();
    while let Some(o) = queue.pop_front() {
        let d = dist[o];
        for next in adjacent.get(o).into_iter().flatten() {
            if !dist.contains_key(next) {
                dist.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    // Hand back the problem's own string slices rather than the atoms'.
    problem
        .object_names()
        .filter_map(|o| dist.get(o).map(|d| (o, *d)))
        .collect()
}

/// A single planner call on the full problem, traced like the other methods.
pub fn pure_plan(problem: &Problem, config: &PloiConfig) -> Result<(PlanResult, PloiTrace), RuntimeError> {
    config.check()?;
    let mut run = Run::new("pure", problem, config);
    let everything: ObjectSubset = problem.object_names().map(String::from).collect();
    let Step::Done(outcome) = run.attempt(1, None, &everything)? else {
        unreachable!("planning on the full problem always finishes the run")
    };
    Ok(run.finish(outcome))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::benchgen::{generate, Family, GeneratorSpec};
    use crate::reduction::tests::scene;

    fn config(gamma: f64) -> PloiConfig {
        PloiConfig {
            gamma,
            ..PloiConfig::new(PlannerConfig::gbfs(Duration::from_secs(20)))
        }
    }

    fn spec(family: Family, size: usize, aux: usize, goal: usize, extra: usize, seed: u64) -> Problem {
        generate(&GeneratorSpec {
            family,
            size,
            aux,
            goal_size: goal,
            extraneous: extra,
            obstruct: false,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn scene_needs_two_iterations() {
        let p = scene();
        // A must fall between gamma^2 and gamma to join at the second step.
        let scores = [("a", 0.92), ("b", 1.0), ("c", 0.03), ("d", 1.0), ("robot", 1.0)]
            .into_iter()
            .map(|(o, s)| (o.to_string(), s))
            .collect();
        let (result, trace) = ploi_plan(&p, &Scorer::Fixed(scores), &config(0.95)).unwrap();
        assert_eq!(trace.records.len(), 2);
        assert_eq!(trace.records[0].n, 1);
        assert_eq!(trace.records[0].objects, 3);
        // Without A, B is not clear in the reduction, so nothing is found.
        assert_eq!(trace.records[0].outcome, "unsolvable");
        assert_eq!(trace.records[1].n, 2);
        assert_eq!(trace.records[1].objects, 4);
        assert_eq!(trace.records[1].valid, Some(true));
        assert_eq!(trace.success_n, Some(2));
        assert!(validate(result.outcome.plan().unwrap(), &p));
    }

    #[test]
    fn constant_one_is_pure_planning() {
        let p = spec(Family::Gripper, 6, 3, 2, 0, 1);
        let (result, trace) = ploi_plan(&p, &Scorer::Constant(1.0), &config(0.9)).unwrap();
        let (pure, _) = pure_plan(&p, &config(0.9)).unwrap();
        assert_eq!(trace.planner_calls(), 1);
        assert_eq!(trace.records[0].objects, p.num_objects());
        assert_eq!(result.outcome, pure.outcome);
    }

    #[test]
    fn tiny_scores_skip_to_the_full_set() {
        let p = scene();
        let goal = p.goal().objects();
        let scores = p
            .object_names()
            .map(|o| (o.to_string(), if goal.contains(o) { 1.0 } else { 1e-6 }))
            .collect();
        let (result, trace) = ploi_plan(&p, &Scorer::Fixed(scores), &config(0.9)).unwrap();
        assert!(trace.planner_calls() <= 2);
        // Smallest N with 0.9^N <= 1e-6.
        let expected = (1e-6f64.ln() / 0.9f64.ln()).ceil() as usize;
        assert_eq!(expected, 132);
        assert_eq!(trace.records.last().unwrap().n, expected);
        assert_eq!(trace.records.last().unwrap().objects, p.num_objects());
        assert!(validate(result.outcome.plan().unwrap(), &p));
    }

    #[test]
    fn random_scores_are_seeded_and_uniform() {
        let p = spec(Family::Gripper, 300, 4, 2, 0, 5);
        let goal = p.goal().objects();
        let a = Scorer::Random { seed: 3 }.scores(&p).unwrap();
        assert_eq!(a, Scorer::Random { seed: 3 }.scores(&p).unwrap());
        assert_ne!(a, Scorer::Random { seed: 4 }.scores(&p).unwrap());
        for o in &goal {
            assert_eq!(a[*o], 1.0);
        }
        let mut sample = Vec::new();
        for seed in 0.. {
            let scores = Scorer::Random { seed }.scores(&p).unwrap();
            sample.extend(scores.iter().filter(|(o, _)| !goal.contains(o.as_str())).map(|(_, s)| *s));
            if sample.len() >= 10_000 {
                break;
            }
        }
        sample.truncate(10_000);
        assert!(sample.iter().all(|s| *s > 0.0 && *s < 1.0));
        let mean = sample.iter().sum::<f64>() / sample.len() as f64;
        assert!(mean > 0.48 && mean < 0.52, "{mean}");
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let p = scene();
        assert!(ploi_plan(&p, &Scorer::Constant(1.0), &config(1.0)).is_err());
        assert!(ploi_plan(&p, &Scorer::Constant(0.0), &config(0.9)).is_err());
        assert!(ploi_plan(&p, &Scorer::Fixed(BTreeMap::new()), &config(0.9)).is_err());
    }

    #[test]
    fn exhausted_budget_times_out() {
        let p = spec(Family::Gripper, 6, 3, 2, 0, 1);
        let cfg = PloiConfig {
            max_wall_time: Duration::from_nanos(1),
            ..config(0.9)
        };
        let (result, trace) = ploi_plan(&p, &Scorer::Random { seed: 0 }, &cfg).unwrap();
        assert_eq!(result.outcome, Outcome::Timeout);
        assert!(trace.records.is_empty());
    }

    #[test]
    fn gripper_neighbors_reach_the_room() {
        let p = spec(Family::Gripper, 3, 3, 1, 0, 2);
        let hops = hop_distances(&p);
        let ball = *p.goal().objects().iter().find(|o| o.starts_with("ball")).unwrap();
        let room = p
            .init()
            .iter()
            .find(|a| a.predicate == "at" && a.args[0] == ball)
            .map(|a| a.args[1].as_str())
            .unwrap();
        assert_eq!(hops[ball], 0);
        assert_eq!(hops[room], if p.goal().objects().contains(room) { 0 } else { 1 });
        let (result, trace) = neighbors_plan(&p, &config(0.9)).unwrap();
        assert!(validate(result.outcome.plan().unwrap(), &p));
        assert_eq!(trace.records[0].n, 0);
        assert_eq!(trace.records[0].objects, p.goal().objects().len());
    }

    #[test]
    fn isolated_goal_objects_fall_back_at_once() {
        // The goal objects relate to nothing, so the hop sets never grow.
        let q = crate::strips::parse_problem(
            "(define (problem iso2) (:domain blocks)
             (:objects a b - block r - robot)
             (:init (handempty r) (ontable a) (ontable b) (clear a) (clear b))
             (:goal (and (on a b))))",
            &Family::Blocks.domain(),
        )
        .unwrap();
        let (result, trace) = neighbors_plan(&q, &config(0.9)).unwrap();
        assert_eq!(trace.records[0].objects, 2);
        assert_ne!(trace.records[0].valid, Some(true));
        assert!(trace.fell_back);
        assert_eq!(trace.records.len(), 2);
        assert_eq!(trace.records[1].objects, 3);
        assert!(validate(result.outcome.plan().unwrap(), &q));
    }

    #[test]
    fn connected_relations_cover_everything_in_one_hop() {
        let p = scene();
        let hops = hop_distances(&p);
        assert_eq!(hops.get("c"), None);
        // gripper with one room: every ball and the room sit within two hops.
        let q = spec(Family::Gripper, 4, 2, 1, 0, 9);
        let (_, trace) = neighbors_plan(&q, &config(0.9)).unwrap();
        assert!(trace.records.len() <= 4);
    }

    #[test]
    fn trace_lines_parse_back() {
        let p = scene();
        let (_, trace) = ploi_plan(&p, &Scorer::Random { seed: 1 }, &config(0.9)).unwrap();
        let text = trace.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), trace.records.len());
        for (line, rec) in lines.iter().zip(&trace.records) {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["problem"], "scene");
            assert_eq!(v["n"], rec.n);
        }
    }

    fn small_problem() -> impl Strategy<Value = Problem> {
        (0usize..3, any::<u64>(), 0usize..4).prop_map(|(family, seed, extra)| match family {
            0 => spec(Family::Gripper, 4, 3, 2, extra, seed),
            1 => spec(Family::Blocks, 5, 0, 2, extra, seed),
            _ => spec(Family::Ferry, 3, 3, 2, extra, seed),
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn positive_scores_always_reach_a_valid_plan(p in small_problem(), seed in any::<u64>(), gamma in 0.3f64..0.99) {
            let (result, trace) = ploi_plan(&p, &Scorer::Random { seed }, &config(gamma)).unwrap();
            let plan = result.outcome.plan();
            prop_assert!(plan.is_some());
            prop_assert!(validate(plan.unwrap(), &p));
            prop_assert!(trace.planner_calls() <= p.num_objects());
            for w in trace.records.windows(2) {
                prop_assert!(w[0].threshold.unwrap() > w[1].threshold.unwrap());
                prop_assert!(w[0].objects < w[1].objects);
            }
            for r in &trace.records {
                if r.objects < p.num_objects() && r.plan_length.is_some() && trace.success_n == Some(r.n) {
                    prop_assert_eq!(r.valid, Some(true));
                }
            }
        }
    }
}
