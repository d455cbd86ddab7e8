//! Train/test suites written as a directory of PDDL files plus a manifest.
//!
//! ```text
//! OUT/domain.pddl
//! OUT/train/p000.pddl ...
//! OUT/test/p000.pddl ...        (or x025-p000.pddl when sweeping extras)
//! OUT/manifest.json
//! ```

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{generate, object_counts, Family, GenerateError, GeneratorSpec};
use crate::strips::{parse_domain, parse_problem, print_problem, Problem};

/// Inclusive ranges; object totals for gripper, blocks and ferry, disk counts
/// for hanoi.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteSpec {
    pub family: Family,
    pub train: usize,
    pub test: usize,
    pub train_size: (usize, usize),
    pub test_size: (usize, usize),
    pub train_goal: (usize, usize),
    pub test_goal: (usize, usize),
    /// Extraneous objects added to every test problem.
    pub extraneous: usize,
    /// When set, every test problem is emitted once per listed extraneous count.
    pub sweep: Option<Vec<usize>>,
    pub obstruct: bool,
    pub seed: u64,
}

impl SuiteSpec {
    pub fn defaults(family: Family, train: usize, test: usize, seed: u64) -> Self {
        let (train_size, test_size, train_goal, test_goal) = match family {
            Family::Gripper => ((36, 52), (200, 400), (2, 4), (10, 20)),
            Family::Blocks => ((10, 20), (30, 40), (2, 4), (4, 6)),
            Family::Ferry => ((13, 21), (60, 100), (3, 3), (3, 3)),
            Family::Hanoi => ((3, 6), (6, 10), (0, 0), (0, 0)),
        };
        SuiteSpec {
            family,
            train,
            test,
            train_size,
            test_size,
            train_goal,
            test_goal,
            extraneous: 0,
            sweep: None,
            obstruct: false,
            seed,
        }
    }

    /// Distribution notes recorded in the manifest.
    fn distribution(&self) -> &'static str {
        match self.family {
            Family::Gripper => "3-5 rooms (train) or 4-6 (test), two grippers, balls fill the rest; balls and robot placed uniformly; goal balls sent to a different uniform room",
            Family::Blocks => "one robot, blocks shuffled into piles of uniform height 1-3; goal is a tower over a uniform subset",
            Family::Ferry => "one ferry, 3-5 locations (train) or 5-8 (test), cars fill the rest; cars and ferry placed uniformly; goal cars sent to a different uniform location",
            Family::Hanoi => "three pegs, all disks start on peg1 and end on peg3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub spec: GeneratorSpec,
    pub objects: usize,
    pub object_counts: std::collections::BTreeMap<String, usize>,
    pub goal_literals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub family: Family,
    pub domain_file: String,
    pub suite: SuiteSpec,
    pub distribution: String,
    pub train: Vec<ManifestEntry>,
    pub test: Vec<ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub entry: ManifestEntry,
    pub problem: Problem,
}

#[derive(Debug, Clone)]
pub struct Suite {
    pub manifest: Manifest,
    pub train: Vec<GeneratedProblem>,
    pub test: Vec<GeneratedProblem>,
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (usize, usize)) -> usize {
    rng.random_range(lo.min(hi)..=hi.max(lo))
}

/// Turns a total object count into family size knobs.
fn sized_spec(
    family: Family,
    total: usize,
    goal: usize,
    test: bool,
    rng: &mut ChaCha8Rng,
) -> GeneratorSpec {
    let (size, aux) = match family {
        Family::Gripper => {
            let rooms = if test { sample(rng, (4, 6)) } else { sample(rng, (3, 5)) };
            (total.saturating_sub(rooms + 2).max(goal), rooms)
        }
        Family::Blocks => (total.max(goal), 0),
        Family::Ferry => {
            let locations = if test { sample(rng, (5, 8)) } else { sample(rng, (3, 5)) };
            (total.saturating_sub(locations + 1).max(goal), locations)
        }
        Family::Hanoi => (total, 0),
    };
    GeneratorSpec {
        family,
        size,
        aux,
        goal_size: goal,
        extraneous: 0,
        obstruct: false,
        seed: rng.random(),
    }
}

fn emit(spec: GeneratorSpec, file: String) -> Result<GeneratedProblem, GenerateError> {
    let problem = generate(&spec)?;
    Ok(GeneratedProblem {
        entry: ManifestEntry {
            file,
            objects: problem.num_objects(),
            object_counts: object_counts(&problem),
            goal_literals: problem.goal().len(),
            spec,
        },
        problem,
    })
}

/// Builds the suite in memory.
pub fn build_suite(spec: &SuiteSpec) -> Result<Suite, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = Vec::new();
    for i in 0..spec.train {
        let total = sample(&mut rng, spec.train_size);
        let goal = sample(&mut rng, spec.train_goal);
        let g = sized_spec(spec.family, total, goal, false, &mut rng);
        train.push(emit(g, format!("train/p{i:03}.pddl"))?);
    }
    let mut test = Vec::new();
    for i in 0..spec.test {
        let total = sample(&mut rng, spec.test_size);
        let goal = sample(&mut rng, spec.test_goal);
        let mut g = sized_spec(spec.family, total, goal, true, &mut rng);
        g.obstruct = spec.obstruct;
        match &spec.sweep {
            None => {
                g.extraneous = spec.extraneous;
                test.push(emit(g, format!("test/p{i:03}.pddl"))?);
            }
            Some(levels) => {
                for &x in levels {
                    let mut s = g.clone();
                    s.extraneous = x;
                    test.push(emit(s, format!("test/x{x:03}-p{i:03}.pddl"))?);
                }
            }
        }
    }
    let manifest = Manifest {
        family: spec.family,
        domain_file: "domain.pddl".into(),
        suite: spec.clone(),
        distribution: spec.distribution().into(),
        train: train.iter().map(|p| p.entry.clone()).collect(),
        test: test.iter().map(|p| p.entry.clone()).collect(),
    };
    Ok(Suite {
        manifest,
        train,
        test,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

fn write(path: &Path, contents: &str) -> Result<(), SuiteError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| SuiteError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the suite under `out` and returns it.
pub fn generate_suite(spec: &SuiteSpec, out: &Path) -> Result<Suite, SuiteError> {
    let suite = build_suite(spec)?;
    write(&out.join("domain.pddl"), spec.family.domain_text())?;
    for p in suite.train.iter().chain(&suite.test) {
        write(&out.join(&p.entry.file), &print_problem(&p.problem))?;
    }
    let json = serde_json::to_string_pretty(&suite.manifest).expect("manifest serializes");
    write(&out.join("manifest.json"), &(json + "\n"))?;
    Ok(suite)
}

fn read(path: &Path) -> Result<String, SuiteError> {
    std::fs::read_to_string(path).map_err(|source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl Suite {
    /// Reads a suite directory written by [`generate_suite`]. Problems are
    /// parsed from disk, so hand-edited files are honored.
    pub fn load(dir: &Path) -> Result<Suite, SuiteError> {
        let manifest_path = dir.join("manifest.json");
        let manifest: Manifest = serde_json::from_str(&read(&manifest_path)?).map_err(|e| SuiteError::Format {
            path: manifest_path.display().to_string(),
            message: e.to_string(),
        })?;
        let domain_path = dir.join(&manifest.domain_file);
        let domain = std::sync::Arc::new(parse_domain(&read(&domain_path)?).map_err(|e| SuiteError::Format {
            path: domain_path.display().to_string(),
            message: e.to_string(),
        })?);
        let load = |entries: &[ManifestEntry]| -> Result<Vec<GeneratedProblem>, SuiteError> {
            entries
                .iter()
                .map(|entry| {
                    let path = dir.join(&entry.file);
                    let problem = parse_problem(&read(&path)?, &domain).map_err(|e| SuiteError::Format {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                    Ok(GeneratedProblem {
                        entry: entry.clone(),
                        problem,
                    })
                })
                .collect()
        };
        Ok(Suite {
            train: load(&manifest.train)?,
            test: load(&manifest.test)?,
            manifest,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
        let mut out = BTreeMap::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in std::fs::read_dir(&d).unwrap() {
                let path = e.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    let rel = path.strip_prefix(dir).unwrap().display().to_string();
                    out.insert(rel, std::fs::read(&path).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn forty_ten_gripper_suite_file_count() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = SuiteSpec::defaults(Family::Gripper, 40, 10, 3);
        spec.test_size = (60, 80);
        generate_suite(&spec, dir.path()).unwrap();
        let files = tree(dir.path());
        assert_eq!(files.len(), 51 + 1);
        assert!(files.contains_key("manifest.json"));
        assert_eq!(files.keys().filter(|k| k.ends_with(".pddl")).count(), 51);
    }

    #[test]
    fn load_reads_back_what_was_written() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SuiteSpec::defaults(Family::Ferry, 3, 2, 4);
        let written = generate_suite(&spec, dir.path()).unwrap();
        let loaded = Suite::load(dir.path()).unwrap();
        assert_eq!(loaded.manifest, written.manifest);
        for (a, b) in loaded.train.iter().chain(&loaded.test).zip(written.train.iter().chain(&written.test)) {
            assert_eq!(a.problem.init(), b.problem.init());
            assert_eq!(a.problem.goal(), b.problem.goal());
            assert_eq!(a.problem.objects(), b.problem.objects());
        }
        std::fs::write(dir.path().join("train/p001.pddl"), "(define").unwrap();
        assert!(matches!(Suite::load(dir.path()), Err(SuiteError::Format { .. })));
    }

    #[test]
    fn same_seed_same_bytes() {
        let spec = SuiteSpec::defaults(Family::Blocks, 3, 2, 9);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate_suite(&spec, a.path()).unwrap();
        generate_suite(&spec, b.path()).unwrap();
        assert_eq!(tree(a.path()), tree(b.path()));
    }

    #[test]
    fn default_test_sizes_follow_ranges() {
        let suite = build_suite(&SuiteSpec::defaults(Family::Gripper, 2, 10, 1)).unwrap();
        for p in &suite.test {
            assert!((200..=400).contains(&p.problem.num_objects()));
            assert!((10..=20).contains(&p.problem.goal().len()));
        }
        for p in &suite.train {
            assert!((36..=52).contains(&p.problem.num_objects()));
        }
    }

    #[test]
    fn sweep_shares_base_problem() {
        let mut spec = SuiteSpec::defaults(Family::Gripper, 0, 2, 5);
        spec.test_size = (10, 12);
        spec.test_goal = (2, 3);
        spec.sweep = Some(vec![0, 25, 50]);
        let suite = build_suite(&spec).unwrap();
        assert_eq!(suite.test.len(), 6);
        let base = &suite.test[0];
        let more = &suite.test[2];
        assert_eq!(more.problem.num_objects(), base.problem.num_objects() + 50);
        assert_eq!(base.problem.goal(), more.problem.goal());
        assert_eq!(more.entry.file, "test/x050-p000.pddl");
    }
}
