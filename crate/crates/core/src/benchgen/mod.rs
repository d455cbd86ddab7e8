//! Procedural problem generators for four families: gripper, blocks, ferry
//! and hanoi. Every generator is deterministic in its seed, and extraneous
//! objects are drawn from a separate stream so that the base problem is the
//! same for every extraneous count.

mod domains;
mod suite;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::strips::{parse_domain, Atom, DomainModel, Literal, Problem};

pub use suite::{build_suite, generate_suite, GeneratedProblem, Manifest, ManifestEntry, Suite, SuiteError, SuiteSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Blocks,
    Gripper,
    Ferry,
    Hanoi,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Blocks, Family::Gripper, Family::Ferry, Family::Hanoi];

    pub fn name(self) -> &'static str {
        match self {
            Family::Blocks => "blocks",
            Family::Gripper => "gripper",
            Family::Ferry => "ferry",
            Family::Hanoi => "hanoi",
        }
    }

    pub fn domain_text(self) -> &'static str {
        match self {
            Family::Blocks => domains::BLOCKS,
            Family::Gripper => domains::GRIPPER,
            Family::Ferry => domains::FERRY,
            Family::Hanoi => domains::HANOI,
        }
    }

    /// The parsed domain, shared by all problems of the family.
    pub fn domain(self) -> Arc<DomainModel> {
        static CACHE: OnceLock<[Arc<DomainModel>; 4]> = OnceLock::new();
        let all = CACHE.get_or_init(|| {
            Family::ALL.map(|f| Arc::new(parse_domain(f.domain_text()).expect("builtin domain parses")))
        });
        Arc::clone(&all[self as usize])
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s.to_lowercase())
            .ok_or_else(|| format!("unknown family `{s}` (expected blocks, gripper, ferry or hanoi)"))
    }
}

/// Size knobs, read per family:
///
/// | family  | `size`      | `aux`      | `goal_size`              |
/// |---------|-------------|------------|--------------------------|
/// | gripper | balls       | rooms      | balls to relocate        |
/// | blocks  | blocks      | unused     | blocks in the goal tower |
/// | ferry   | cars        | locations  | cars to relocate         |
/// | hanoi   | disks       | unused     | unused (all disks)       |
///
/// `extraneous` adds objects that no plan for the goal needs; hanoi ignores it.
/// With `obstruct`, blocks places up to two of its extras on goal piles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub size: usize,
    #[serde(default)]
    pub aux: usize,
    pub goal_size: usize,
    #[serde(default)]
    pub extraneous: usize,
    #[serde(default)]
    pub obstruct: bool,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("infeasible {family} spec: {reason}")]
    Infeasible { family: Family, reason: String },
}

fn infeasible(family: Family, reason: impl Into<String>) -> GenerateError {
    GenerateError::Infeasible {
        family,
        reason: reason.into(),
    }
}

/// Zero-padded names so that lexicographic and numeric order agree.
fn names(prefix: &str, start: usize, count: usize, width: usize) -> Vec<String> {
    (start..start + count)
        .map(|i| format!("{prefix}{i:0width$}"))
        .collect()
}

fn width(n: usize) -> usize {
    n.max(1).to_string().len().max(2)
}

const EXTRA_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

struct Builder {
    objects: Vec<(String, String)>,
    facts: Vec<Atom>,
    goal: Vec<Literal>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            objects: Vec::new(),
            facts: Vec::new(),
            goal: Vec::new(),
        }
    }

    fn objects(&mut self, list: &[String], ty: &str) {
        self.objects
            .extend(list.iter().map(|o| (o.clone(), ty.to_string())));
    }

    fn fact(&mut self, p: &str, args: &[&str]) {
        self.facts.push(Atom::new(p, args));
    }

    fn goal(&mut self, p: &str, args: &[&str]) {
        self.goal.push(Literal::pos(Atom::new(p, args)));
    }

    fn finish(self, name: &str, family: Family) -> Problem {
        Problem::new(name, family.domain(), &self.objects, self.facts, self.goal)
            .expect("generator emits well-formed problems")
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Problem, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut extra_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ EXTRA_STREAM);
    let name = format!(
        "{}-n{}-x{}-s{}",
        spec.family, spec.size, spec.extraneous, spec.seed
    );
    match spec.family {
        Family::Gripper => gripper(spec, &mut rng, &mut extra_rng, &name),
        Family::Blocks => blocks(spec, &mut rng, &mut extra_rng, &name),
        Family::Ferry => ferry(spec, &mut rng, &mut extra_rng, &name),
        Family::Hanoi => hanoi(spec, &name),
    }
}

fn gripper(
    spec: &GeneratorSpec,
    rng: &mut ChaCha8Rng,
    extra_rng: &mut ChaCha8Rng,
    name: &str,
) -> Result<Problem, GenerateError> {
    let f = Family::Gripper;
    if spec.aux < 2 {
        return Err(infeasible(f, "needs at least two rooms"));
    }
    if spec.goal_size > spec.size {
        return Err(infeasible(f, "goal larger than the number of balls"));
    }
    let rooms = names("room", 0, spec.aux, width(spec.aux));
    let w = width(spec.size + spec.extraneous);
    let balls = names("ball", 0, spec.size, w);
    let extras = names("ball", spec.size, spec.extraneous, w);
    let mut b = Builder::new();
    b.objects(&rooms, "room");
    b.objects(&balls, "ball");
    b.objects(&extras, "ball");
    b.objects(&["left".into(), "right".into()], "gripper");
    b.fact("free", &["left"]);
    b.fact("free", &["right"]);
    b.fact("at-robby", &[&rooms[rng.random_range(0..rooms.len())]]);
    let mut location = Vec::new();
    for ball in &balls {
        let r = rng.random_range(0..rooms.len());
        b.fact("at", &[ball, &rooms[r]]);
        location.push(r);
    }
    let mut chosen: Vec<usize> = (0..balls.len()).collect();
    chosen.shuffle(rng);
    chosen.truncate(spec.goal_size);
    chosen.sort_unstable();
    for i in chosen {
        let mut target = rng.random_range(0..rooms.len() - 1);
        if target >= location[i] {
            target += 1;
        }
        b.goal("at", &[&balls[i], &rooms[target]]);
    }
    for ball in &extras {
        b.fact("at", &[ball, &rooms[extra_rng.random_range(0..rooms.len())]]);
    }
    Ok(b.finish(name, f))
}

/// Splits `items` into piles of height 1 to 3, bottom first.
fn piles(items: &[String], rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let h = rng.random_range(1..=3).min(items.len() - i);
        out.push(items[i..i + h].to_vec());
        i += h;
    }
    out
}

fn blocks(
    spec: &GeneratorSpec,
    rng: &mut ChaCha8Rng,
    extra_rng: &mut ChaCha8Rng,
    name: &str,
) -> Result<Problem, GenerateError> {
    let f = Family::Blocks;
    if spec.goal_size < 2 || spec.goal_size > spec.size {
        return Err(infeasible(f, "goal tower needs between 2 and `size` blocks"));
    }
    let w = width(spec.size + spec.extraneous);
    let base = names("b", 0, spec.size, w);
    let extras = names("b", spec.size, spec.extraneous, w);
    let mut b = Builder::new();
    b.objects(&base, "block");
    b.objects(&extras, "block");
    b.objects(&["robot".into()], "robot");
    b.fact("handempty", &["robot"]);

    let mut shuffled = base.clone();
    shuffled.shuffle(rng);
    let mut base_piles = piles(&shuffled, rng);
    let mut tower = base.clone();
    tower.shuffle(rng);
    tower.truncate(spec.goal_size);
    for pair in tower.windows(2) {
        b.goal("on", &[&pair[0], &pair[1]]);
    }

    let mut extra_order = extras.clone();
    extra_order.shuffle(extra_rng);
    let mut extra_piles = piles(&extra_order, extra_rng);
    if spec.obstruct {
        // Move up to two single extras on top of piles holding goal blocks.
        let goal_piles: Vec<usize> = base_piles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.iter().any(|x| tower.contains(x)))
            .map(|(i, _)| i)
            .collect();
        for _ in 0..2 {
            let Some(pile) = extra_piles.iter_mut().find(|p| !p.is_empty()) else {
                break;
            };
            let block = pile.pop().unwrap();
            let target = goal_piles[extra_rng.random_range(0..goal_piles.len())];
            base_piles[target].push(block);
        }
        extra_piles.retain(|p| !p.is_empty());
    }
    for pile in base_piles.iter().chain(&extra_piles) {
        b.fact("ontable", &[&pile[0]]);
        for pair in pile.windows(2) {
            b.fact("on", &[&pair[1], &pair[0]]);
        }
        b.fact("clear", &[pile.last().unwrap()]);
    }
    Ok(b.finish(name, f))
}

fn ferry(
    spec: &GeneratorSpec,
    rng: &mut ChaCha8Rng,
    extra_rng: &mut ChaCha8Rng,
    name: &str,
) -> Result<Problem, GenerateError> {
    let f = Family::Ferry;
    if spec.aux < 2 {
        return Err(infeasible(f, "needs at least two locations"));
    }
    if spec.goal_size > spec.size {
        return Err(infeasible(f, "goal larger than the number of cars"));
    }
    let locations = names("loc", 0, spec.aux, width(spec.aux));
    let w = width(spec.size + spec.extraneous);
    let cars = names("car", 0, spec.size, w);
    let extras = names("car", spec.size, spec.extraneous, w);
    let mut b = Builder::new();
    b.objects(&locations, "location");
    b.objects(&cars, "car");
    b.objects(&extras, "car");
    b.objects(&["ferry".into()], "ferry");
    b.fact("empty-ferry", &["ferry"]);
    b.fact("at-ferry", &["ferry", &locations[rng.random_range(0..locations.len())]]);
    let mut location = Vec::new();
    for car in &cars {
        let l = rng.random_range(0..locations.len());
        b.fact("at", &[car, &locations[l]]);
        location.push(l);
    }
    let mut chosen: Vec<usize> = (0..cars.len()).collect();
    chosen.shuffle(rng);
    chosen.truncate(spec.goal_size);
    chosen.sort_unstable();
    for i in chosen {
        let mut target = rng.random_range(0..locations.len() - 1);
        if target >= location[i] {
            target += 1;
        }
        b.goal("at", &[&cars[i], &locations[target]]);
    }
    for car in &extras {
        b.fact("at", &[car, &locations[extra_rng.random_range(0..locations.len())]]);
    }
    Ok(b.finish(name, f))
}

/// Classic tower: every disk starts on the first peg and must end on the last.
fn hanoi(spec: &GeneratorSpec, name: &str) -> Result<Problem, GenerateError> {
    let f = Family::Hanoi;
    if spec.size == 0 {
        return Err(infeasible(f, "needs at least one disk"));
    }
    // d01 is the smallest disk.
    let disks = names("d", 1, spec.size, width(spec.size));
    let pegs: Vec<String> = ["peg1", "peg2", "peg3"].map(String::from).to_vec();
    let mut b = Builder::new();
    b.objects(&disks, "disk");
    b.objects(&pegs, "peg");
    for (i, d) in disks.iter().enumerate() {
        for p in &pegs {
            b.fact("smaller", &[p, d]);
        }
        for larger in &disks[i + 1..] {
            b.fact("smaller", &[larger, d]);
        }
    }
    let bottom_up: Vec<&String> = disks.iter().rev().collect();
    let place = |b: &mut Builder, goal: bool, peg: &str| {
        let mut below = peg.to_string();
        for d in &bottom_up {
            if goal {
                b.goal("on", &[d, &below]);
            } else {
                b.fact("on", &[d, &below]);
            }
            below = (*d).clone();
        }
    };
    place(&mut b, false, "peg1");
    place(&mut b, true, "peg3");
    b.fact("clear", &[&disks[0]]);
    b.fact("clear", &["peg2"]);
    b.fact("clear", &["peg3"]);
    Ok(b.finish(name, f))
}

/// Object counts by type, used in manifests.
pub fn object_counts(problem: &Problem) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for t in problem.objects().values() {
        *counts.entry(t.clone()).or_insert(0) += 1;
    }
    counts
}
