//! Compilation of a problem into an integer task: interned fluent atoms,
//! ground actions with static preconditions already evaluated.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use web_time::Instant;

use crate::strips::{ActionSchema, Atom, GroundAction, Plan, Problem};

pub(crate) struct TaskAction {
    pub schema: u32,
    pub args: Vec<u32>,
    pub pre_pos: Vec<u32>,
    pub pre_neg: Vec<u32>,
    pub add: Vec<u32>,
    pub del: Vec<u32>,
}

pub(crate) struct Task {
    pub num_atoms: usize,
    pub init: Vec<u32>,
    pub goal_pos: Vec<u32>,
    pub goal_neg: Vec<u32>,
    /// A static goal literal is false in the initial state.
    pub trivially_unsolvable: bool,
    pub actions: Vec<TaskAction>,
    schemas: Vec<Arc<ActionSchema>>,
    objects: Vec<String>,
}

pub(crate) struct DeadlineExceeded;

const NO_ARG: u32 = u32::MAX;

#[derive(Default)]
struct Interner {
    ids: HashMap<(u32, u32, u32), u32>,
}

impl Interner {
    fn get(&mut self, key: (u32, u32, u32)) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(next)
    }
}

impl Task {
    pub fn compile(problem: &Problem, deadline: Instant) -> Result<Task, DeadlineExceeded> {
        let domain = problem.domain();
        let objects: Vec<String> = problem.object_names().map(String::from).collect();
        let object_index: HashMap<&str, u32> = objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.as_str(), i as u32))
            .collect();
        let pred_index: HashMap<&str, u32> = domain
            .types
            .iter()
            .map(|t| t.name.as_str())
            .chain(domain.predicates.iter().map(|p| p.name.as_str()))
            .enumerate()
            .map(|(i, n)| (n, i as u32))
            .collect();
        let mut fluent = vec![false; pred_index.len()];
        for a in &domain.actions {
            for e in a.add_effects.iter().chain(&a.delete_effects) {
                fluent[pred_index[e.predicate.as_str()] as usize] = true;
            }
        }
        let key_of = |atom: &Atom| -> (u32, u32, u32) {
            let p = pred_index[atom.predicate.as_str()];
            let a0 = object_index[atom.args[0].as_str()];
            let a1 = atom.args.get(1).map_or(NO_ARG, |a| object_index[a.as_str()]);
            (p, a0, a1)
        };

        let mut interner = Interner::default();
        let mut static_true: HashSet<(u32, u32, u32)> = HashSet::new();
        let mut init = Vec::new();
        for atom in problem.init().iter() {
            let key = key_of(atom);
            if fluent[key.0 as usize] {
                init.push(interner.get(key));
            } else {
                static_true.insert(key);
            }
        }

        let mut trivially_unsolvable = false;
        let mut goal_pos = Vec::new();
        let mut goal_neg = Vec::new();
        for lit in problem.goal().literals() {
            let key = key_of(&lit.atom);
            if fluent[key.0 as usize] {
                let id = interner.get(key);
                if lit.positive {
                    goal_pos.push(id);
                } else {
                    goal_neg.push(id);
                }
            } else if static_true.contains(&key) != lit.positive {
                trivially_unsolvable = true;
            }
        }

        let mut schemas: Vec<Arc<ActionSchema>> = domain.actions.clone();
        schemas.sort_by(|a, b| a.name.cmp(&b.name));
        let mut actions = Vec::new();
        let mut counter = 0usize;
        for (si, schema) in schemas.iter().enumerate() {
            let candidates: Vec<Vec<u32>> = schema
                .parameters
                .iter()
                .map(|p| {
                    problem
                        .objects_of_type(&p.type_name)
                        .map(|o| object_index[o])
                        .collect()
                })
                .collect();
            if candidates.iter().any(Vec::is_empty) {
                continue;
            }
            // Static literals become checkable once their last argument is bound.
            let mut static_checks: Vec<Vec<(u32, &[usize], bool)>> =
                vec![Vec::new(); schema.parameters.len().max(1)];
            let mut fluent_pre = Vec::new();
            for l in &schema.preconditions {
                let p = pred_index[l.atom.predicate.as_str()];
                if fluent[p as usize] {
                    fluent_pre.push(l);
                } else {
                    let last = l.atom.args.iter().copied().max().unwrap_or(0);
                    static_checks[last].push((p, &l.atom.args, l.positive));
                }
            }
            let n = schema.parameters.len();
            let mut binding = vec![0u32; n];
            let mut idx = vec![0usize; n];
            let mut depth = 0usize;
            // Iterative backtracking over parameter bindings.
            loop {
                if n == 0 {
                    let ok = static_checks[0].iter().all(|(p, args, positive)| {
                        let key = static_key(*p, args, &binding);
                        static_true.contains(&key) == *positive
                    });
                    if ok {
                        actions.push(build_action(si as u32, &binding, schema, &fluent_pre, &pred_index, &mut interner));
                    }
                    break;
                }
                if idx[depth] >= candidates[depth].len() {
                    if depth == 0 {
                        break;
                    }
                    idx[depth] = 0;
                    depth -= 1;
                    idx[depth] += 1;
                    continue;
                }
                binding[depth] = candidates[depth][idx[depth]];
                let ok = static_checks[depth].iter().all(|(p, args, positive)| {
                    let key = static_key(*p, args, &binding);
                    static_true.contains(&key) == *positive
                });
                if !ok {
                    idx[depth] += 1;
                    continue;
                }
                if depth + 1 < n {
                    depth += 1;
                    continue;
                }
                counter += 1;
                if counter % 4096 == 0 && Instant::now() > deadline {
                    return Err(DeadlineExceeded);
                }
                let action = build_action(si as u32, &binding, schema, &fluent_pre, &pred_index, &mut interner);
                if !action.pre_pos.iter().any(|a| action.pre_neg.contains(a)) {
                    actions.push(action);
                }
                idx[depth] += 1;
            }
        }

        Ok(Task {
            num_atoms: interner.ids.len(),
            init: {
                init.sort_unstable();
                init.dedup();
                init
            },
            goal_pos,
            goal_neg,
            trivially_unsolvable,
            actions,
            schemas,
            objects,
        })
    }

    pub fn goal_satisfied(&self, state_marks: &[bool]) -> bool {
        self.goal_pos.iter().all(|&a| state_marks[a as usize])
            && self.goal_neg.iter().all(|&a| !state_marks[a as usize])
    }

    pub fn to_plan(&self, action_ids: &[u32]) -> Plan {
        Plan {
            steps: action_ids
                .iter()
                .map(|&i| {
                    let a = &self.actions[i as usize];
                    GroundAction::new(
                        Arc::clone(&self.schemas[a.schema as usize]),
                        a.args.iter().map(|&o| self.objects[o as usize].clone()).collect(),
                    )
                })
                .collect(),
        }
    }
}

fn static_key(p: u32, args: &[usize], binding: &[u32]) -> (u32, u32, u32) {
    (
        p,
        binding[args[0]],
        args.get(1).map_or(NO_ARG, |&i| binding[i]),
    )
}

fn build_action(
    schema_idx: u32,
    binding: &[u32],
    schema: &ActionSchema,
    fluent_pre: &[&crate::strips::SchemaLiteral],
    pred_index: &HashMap<&str, u32>,
    interner: &mut Interner,
) -> TaskAction {
    let mut intern = |pred: &str, args: &[usize]| {
        interner.get(static_key(pred_index[pred], args, binding))
    };
    let mut pre_pos = Vec::new();
    let mut pre_neg = Vec::new();
    for l in fluent_pre {
        let id = intern(&l.atom.predicate, &l.atom.args);
        if l.positive {
            pre_pos.push(id);
        } else {
            pre_neg.push(id);
        }
    }
    let mut add: Vec<u32> = schema
        .add_effects
        .iter()
        .map(|e| intern(&e.predicate, &e.args))
        .collect();
    let mut del: Vec<u32> = schema
        .delete_effects
        .iter()
        .map(|e| intern(&e.predicate, &e.args))
        .collect();
    for v in [&mut pre_pos, &mut pre_neg, &mut add, &mut del] {
        v.sort_unstable();
        v.dedup();
    }
    // add wins over delete under (s \ del) ∪ add
    del.retain(|d| !add.contains(d));
    TaskAction {
        schema: schema_idx,
        args: binding.to_vec(),
        pre_pos,
        pre_neg,
        add,
        del,
    }
}
