use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ploi");

fn ploi(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn ploi")
}

fn ok(args: &[&str]) -> String {
    let out = ploi(args);
    assert!(
        out.status.success(),
        "ploi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn small_suite(dir: &Path, family: &str) -> PathBuf {
    let suite = dir.join(format!("{family}-suite"));
    let (size, goal) = match family {
        "gripper" => ("8-10", "2-2"),
        _ => ("5-6", "2-2"),
    };
    ok(&[
        "generate", "--family", family, "--train", "3", "--test", "2", "--seed", "4", "--out", s(&suite),
        "--train-size", size, "--test-size", size, "--train-goal", goal, "--test-goal", goal,
    ]);
    suite
}

#[test]
fn generate_writes_a_reproducible_suite() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["generate", "--family", "gripper", "--train", "3", "--test", "1", "--seed", "7", "--out", s(out)]);
    }
    let files = tree(&a);
    let pddl = files.keys().filter(|p| p.extension().is_some_and(|e| e == "pddl")).count();
    assert_eq!(pddl, 5, "{:?}", files.keys().collect::<Vec<_>>());
    assert!(files.contains_key(Path::new("manifest.json")));
    assert_eq!(files, tree(&b));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = ploi(&["generate", "--family", "gripper", "--train", "1", "--test", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ploi(&["generate", "--family", "sokoban", "--train", "1", "--test", "1", "--out", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ploi(&["label", "--suite", s(&dir.path().join("missing")), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn label_train_plan_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let suite = small_suite(dir.path(), "gripper");
    let data = dir.path().join("data");
    ok(&["label", "--suite", s(&suite), "--out", s(&data), "--timeout", "20"]);
    let maps: Vec<PathBuf> = fs::read_dir(&data)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_str().unwrap().ends_with(".labels.json"))
        .collect();
    assert_eq!(maps.len(), 3);
    for m in &maps {
        let labels: BTreeMap<String, u8> = serde_json::from_str(&fs::read_to_string(m).unwrap()).unwrap();
        assert!(labels.values().all(|&y| y <= 1));
        assert!(labels.values().any(|&y| y == 1));
    }

    let model = dir.path().join("model.json");
    ok(&["train", "--dataset", s(&data), "--out", s(&model)]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    let train = &v["meta"]["train"];
    assert_eq!(train["learning_rate"], 0.001);
    assert_eq!(train["epochs"], 1000);
    assert_eq!(train["batch_size"], 16);
    assert_eq!(train["positive_weight"], 10.0);
    assert_eq!(v["dims"]["hidden"], 16);
    assert_eq!(v["dims"]["iterations"], 3);

    let k1 = dir.path().join("k1.json");
    let k1_again = dir.path().join("k1b.json");
    for out in [&k1, &k1_again] {
        ok(&["train", "--dataset", s(&data), "--out", s(out), "--k", "1", "--epochs", "20"]);
    }
    let v: Value = serde_json::from_str(&fs::read_to_string(&k1).unwrap()).unwrap();
    assert_eq!(v["dims"]["iterations"], 1);
    assert_eq!(fs::read(&k1).unwrap(), fs::read(&k1_again).unwrap());

    let domain = suite.join("domain.pddl");
    let problem = suite.join("test/p000.pddl");
    let plan = dir.path().join("plan.txt");
    let trace = dir.path().join("trace.jsonl");
    ok(&[
        "plan", "--domain", s(&domain), "--problem", s(&problem), "--method", "ploi", "--model", s(&model),
        "--out", s(&plan), "--trace", s(&trace),
    ]);
    let stdout = ok(&["validate", "--domain", s(&domain), "--problem", s(&problem), "--plan", s(&plan)]);
    assert!(stdout.starts_with("valid"));
    for line in fs::read_to_string(&trace).unwrap().lines() {
        let rec: Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["method"], "ploi");
    }

    let out = ploi(&["plan", "--domain", s(&domain), "--problem", s(&problem), "--method", "ploi"]);
    assert_eq!(out.status.code(), Some(1));

    fs::write(&plan, "").unwrap();
    let out = ploi(&["validate", "--domain", s(&domain), "--problem", s(&problem), "--plan", s(&plan)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn constant_scorer_matches_pure_planning() {
    let dir = tempfile::tempdir().unwrap();
    let suite = small_suite(dir.path(), "blocks");
    let run = dir.path().join("run");
    ok(&[
        "run", "--suite", s(&suite), "--methods", "pure,constant,random-score", "--seeds", "0,1", "--timeout", "30",
        "--out", s(&run),
    ]);
    for name in ["config.json", "results.csv", "traces.jsonl", "summary.json"] {
        assert!(run.join(name).is_file(), "{name}");
    }
    let mut reader = csv::Reader::from_path(run.join("results.csv")).unwrap();
    let rows: Vec<BTreeMap<String, String>> = reader.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 3 * 2);
    let outcome = |method: &str, problem: &str, seed: &str| {
        rows.iter()
            .find(|r| r["method"] == method && r["problem"] == problem && r["seed"] == seed)
            .map(|r| (r["outcome"].clone(), r["plan_length"].clone()))
            .unwrap()
    };
    for problem in ["test/p000", "test/p001"] {
        assert_eq!(outcome("pure", problem, "0"), outcome("constant", problem, "0"));
    }

    let summary: Value = serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    for m in summary["methods"].as_array().unwrap() {
        let method = m["method"].as_str().unwrap();
        let cells: Vec<_> = rows.iter().filter(|r| r["method"] == method).collect();
        let failed = cells.iter().filter(|r| r["outcome"] != "solved").count();
        assert_eq!(m["cells"], cells.len());
        assert_eq!(m["failure_rate"].as_f64().unwrap(), failed as f64 / cells.len() as f64);
    }

    let report = dir.path().join("report");
    let table = ok(&["report", "--results", s(&run), "--out", s(&report)]);
    assert!(table.contains("| blocks |"));
    let iterations = fs::read_to_string(report.join("iterations.csv")).unwrap();
    assert!(iterations.starts_with("method,iterations,count\n"));
    assert!(iterations.lines().any(|l| l.starts_with("constant,1,")));
}

#[test]
fn report_on_empty_results() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    fs::write(
        &csv,
        "domain,method,seed,problem,objects,extraneous,outcome,wall_time_s,iterations,planner_calls,objects_at_success,plan_length,error\n",
    )
    .unwrap();
    let report = dir.path().join("report");
    let table = ok(&["report", "--results", s(&csv), "--out", s(&report)]);
    assert_eq!(table, "| Domain |\n|---|\n");
    assert_eq!(fs::read_to_string(report.join("extras.csv")).unwrap(), "method,extraneous,cells,solved,median_time_s\n");
}

#[test]
fn external_planner_can_be_this_binary() {
    let dir = tempfile::tempdir().unwrap();
    let suite = small_suite(dir.path(), "blocks");
    let cmd = format!("'{BIN}' plan --domain {{domain}} --problem {{problem}} --out {{plan-out}}");
    let data = dir.path().join("data");
    ok(&["label", "--suite", s(&suite), "--out", s(&data), "--planner", "external", "--planner-cmd", &cmd]);
    let builtin = dir.path().join("builtin");
    ok(&["label", "--suite", s(&suite), "--out", s(&builtin)]);
    for e in fs::read_dir(&builtin).unwrap() {
        let p = e.unwrap().path();
        if p.to_str().unwrap().ends_with(".labels.json") {
            let name = p.file_name().unwrap();
            assert_eq!(fs::read(&p).unwrap(), fs::read(data.join(name)).unwrap(), "{name:?}");
        }
    }
    let out = ploi(&["label", "--suite", s(&suite), "--out", s(&data), "--planner", "external"]);
    assert_eq!(out.status.code(), Some(1));
}
