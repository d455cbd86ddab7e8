//! Training labels: shrink the object set one object at a time while the
//! reduced problem still yields a plan for the original one.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::importance::Example;
use crate::planner::{plan, validate, PlannerConfig, PlannerError};
use crate::reduction::{is_sufficient, ObjectSubset};
use crate::strips::{parse_domain, parse_problem, print_domain, print_problem, DomainModel, Problem};

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("problem `{problem}` cannot be labeled: {reason}")]
    Unlabelable { problem: String, reason: String },
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("no problem could be labeled")]
    EmptyDataset,
    #[error("problems span several domains (`{0}` and `{1}`)")]
    MixedDomains(String, String),
    #[error("dataset {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Order in which removal candidates are tried within a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RemovalOrder {
    #[default]
    Lexicographic,
    Shuffled { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub labels: BTreeMap<String, bool>,
    pub planner_calls: usize,
    pub passes: usize,
    pub wall_time_s: f64,
}

impl Labeling {
    pub fn positives(&self) -> ObjectSubset {
        self.labels.iter().filter(|(_, y)| **y).map(|(o, _)| o.clone()).collect()
    }
}

pub fn greedy_label(problem: &Problem, planner: &PlannerConfig, order: RemovalOrder) -> Result<Labeling, LabelError> {
    let start = Instant::now();
    let unlabelable = |reason: String| LabelError::Unlabelable {
        problem: problem.name.clone(),
        reason,
    };
    let full = plan(problem, planner)?;
    match full.outcome.plan() {
        Some(p) if validate(p, problem) => {}
        Some(_) => return Err(unlabelable("planner returned an invalid plan".into())),
        None => return Err(unlabelable(format!("full problem: {}", full.outcome.label()))),
    }
    let mut planner_calls = 1;

    let goal_objects = problem.goal().objects();
    let mut candidates: Vec<String> = problem
        .object_names()
        .filter(|o| !goal_objects.contains(o))
        .map(String::from)
        .collect();
    if let RemovalOrder::Shuffled { seed } = order {
        candidates.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let mut kept: ObjectSubset = problem.object_names().map(String::from).collect();
    let mut passes = 0;
    loop {
        passes += 1;
        let mut removed = false;
        for o in &candidates {
            if !kept.contains(o) {
                continue;
            }
            kept.remove(o);
            planner_calls += 1;
            if is_sufficient(&kept, problem, planner)? {
                removed = true;
            } else {
                kept.insert(o.clone());
            }
        }
        if !removed {
            break;
        }
    }
    Ok(Labeling {
        labels: problem
            .object_names()
            .map(|o| (o.to_string(), kept.contains(o)))
            .collect(),
        planner_calls,
        passes,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone)]
pub struct DatasetEntry {
    pub id: String,
    pub problem: Problem,
    pub labels: BTreeMap<String, bool>,
    pub planner_calls: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub id: String,
    pub problem: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub domain: Arc<DomainModel>,
    pub planner: PlannerConfig,
    pub order: RemovalOrder,
    pub entries: Vec<DatasetEntry>,
    pub skipped: Vec<Skipped>,
}

impl LabeledDataset {
    pub fn examples(&self) -> Vec<Example<'_>> {
        self.entries
            .iter()
            .map(|e| Example {
                problem: &e.problem,
                labels: &e.labels,
            })
            .collect()
    }

    pub fn total_labels(&self) -> usize {
        self.entries.iter().map(|e| e.labels.len()).sum()
    }
}

/// Labels each `(id, problem)` pair in turn. Unlabelable problems are logged
/// and recorded in `skipped`; planner errors abort.
pub fn build_dataset(
    problems: Vec<(String, Problem)>,
    planner: &PlannerConfig,
    order: RemovalOrder,
) -> Result<LabeledDataset, LabelError> {
    let domain = match problems.first() {
        Some((_, p)) => Arc::clone(p.domain()),
        None => return Err(LabelError::EmptyDataset),
    };
    if let Some((_, p)) = problems.iter().find(|(_, p)| p.domain().name != domain.name) {
        return Err(LabelError::MixedDomains(domain.name.clone(), p.domain().name.clone()));
    }
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for (id, problem) in problems {
        match greedy_label(&problem, planner, order) {
            Ok(l) => {
                log::info!(
                    "{id}: {} of {} objects needed, {} planner calls",
                    l.positives().len(),
                    l.labels.len(),
                    l.planner_calls
                );
                entries.push(DatasetEntry {
                    id,
                    problem,
                    labels: l.labels,
                    planner_calls: l.planner_calls,
                    wall_time_s: l.wall_time_s,
                });
            }
            Err(LabelError::Unlabelable { problem: name, reason }) => {
                log::warn!("skipping {id}: {reason}");
                skipped.push(Skipped {
                    id,
                    problem: name,
                    reason,
                });
            }
            Err(e) => return Err(e),
        }
    }
    if entries.is_empty() {
        return Err(LabelError::EmptyDataset);
    }
    Ok(LabeledDataset {
        domain,
        planner: planner.clone(),
        order,
        entries,
        skipped,
    })
}

pub const DATASET_FORMAT: &str = "ploi-labeled-dataset";
pub const DATASET_MANIFEST: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    id: String,
    problem_file: String,
    labels_file: String,
    objects: usize,
    positives: usize,
    planner_calls: usize,
}

/// Wall times live apart from everything else so that two manifests of the
/// same labeling differ only here.
#[derive(Serialize, Deserialize, Default)]
struct Timing {
    total_s: f64,
    per_entry_s: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct DatasetManifest {
    format: String,
    domain: String,
    domain_file: String,
    planner: PlannerConfig,
    order: RemovalOrder,
    entries: Vec<ManifestEntry>,
    skipped: Vec<Skipped>,
    timing: Timing,
}

fn write(path: PathBuf, text: &str) -> Result<(), LabelError> {
    std::fs::write(&path, text).map_err(|source| LabelError::Io { path, source })
}

fn read(path: PathBuf) -> Result<String, LabelError> {
    std::fs::read_to_string(&path).map_err(|source| LabelError::Io { path, source })
}

impl LabeledDataset {
    /// Writes `domain.pddl`, `<id>.pddl`, `<id>.labels.json` per entry and
    /// `manifest.json`. Label files map object names to 0 or 1.
    pub fn save(&self, dir: &Path) -> Result<(), LabelError> {
        std::fs::create_dir_all(dir).map_err(|source| LabelError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        write(dir.join("domain.pddl"), &print_domain(&self.domain))?;
        let mut entries = Vec::new();
        let mut timing = Timing::default();
        for e in &self.entries {
            let problem_file = format!("{}.pddl", e.id);
            let labels_file = format!("{}.labels.json", e.id);
            write(dir.join(&problem_file), &print_problem(&e.problem))?;
            let ints: BTreeMap<&str, u8> = e.labels.iter().map(|(o, y)| (o.as_str(), *y as u8)).collect();
            write(
                dir.join(&labels_file),
                &(serde_json::to_string_pretty(&ints).expect("labels serialize") + "\n"),
            )?;
            entries.push(ManifestEntry {
                id: e.id.clone(),
                problem_file,
                labels_file,
                objects: e.labels.len(),
                positives: e.labels.values().filter(|y| **y).count(),
                planner_calls: e.planner_calls,
            });
            timing.total_s += e.wall_time_s;
            timing.per_entry_s.insert(e.id.clone(), e.wall_time_s);
        }
        let manifest = DatasetManifest {
            format: DATASET_FORMAT.into(),
            domain: self.domain.name.clone(),
            domain_file: "domain.pddl".into(),
            planner: self.planner.clone(),
            order: self.order,
            entries,
            skipped: self.skipped.clone(),
            timing,
        };
        write(
            dir.join(DATASET_MANIFEST),
            &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
        )
    }

    pub fn load(dir: &Path) -> Result<Self, LabelError> {
        let bad = |message: String| LabelError::Format {
            path: dir.to_path_buf(),
            message,
        };
        let manifest: DatasetManifest = serde_json::from_str(&read(dir.join(DATASET_MANIFEST))?)
            .map_err(|e| bad(format!("{DATASET_MANIFEST}: {e}")))?;
        if manifest.format != DATASET_FORMAT {
            return Err(bad(format!("unexpected format `{}`", manifest.format)));
        }
        let domain = Arc::new(
            parse_domain(&read(dir.join(&manifest.domain_file))?)
                .map_err(|e| bad(e.render(&manifest.domain_file)))?,
        );
        let mut entries = Vec::new();
        for m in manifest.entries {
            let problem = parse_problem(&read(dir.join(&m.problem_file))?, &domain)
                .map_err(|e| bad(e.render(&m.problem_file)))?;
            let ints: BTreeMap<String, u8> = serde_json::from_str(&read(dir.join(&m.labels_file))?)
                .map_err(|e| bad(format!("{}: {e}", m.labels_file)))?;
            if ints.values().any(|v| *v > 1) {
                return Err(bad(format!("{}: labels must be 0 or 1", m.labels_file)));
            }
            let labels: BTreeMap<String, bool> = ints.into_iter().map(|(o, v)| (o, v == 1)).collect();
            if !labels.keys().map(String::as_str).eq(problem.object_names()) {
                return Err(bad(format!("{}: label keys differ from the problem's objects", m.labels_file)));
            }
            let wall_time_s = manifest.timing.per_entry_s.get(&m.id).copied().unwrap_or(0.0);
            entries.push(DatasetEntry {
                id: m.id,
                problem,
                labels,
                planner_calls: m.planner_calls,
                wall_time_s,
            });
        }
        if entries.is_empty() {
            return Err(LabelError::EmptyDataset);
        }
        Ok(LabeledDataset {
            domain,
            planner: manifest.planner,
            order: manifest.order,
            entries,
            skipped: manifest.skipped,
        })
    }
}
