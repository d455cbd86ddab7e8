//! Forward state-space search over a compiled task.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::rc::Rc;

use web_time::Instant;

use super::task::Task;

pub(crate) enum SearchOutcome {
    Solved(Vec<u32>),
    Unsolvable,
    Timeout,
}

#[derive(Default)]
pub(crate) struct SearchCounters {
    pub expanded: u64,
    pub generated: u64,
}

const NONE: u32 = u32::MAX;
const INF: u32 = u32::MAX;

/// Applicable-action lookup keyed on each action's first positive precondition.
struct Successors {
    by_trigger: Vec<Vec<u32>>,
    always: Vec<u32>,
    marks: Vec<bool>,
}

impl Successors {
    fn new(task: &Task) -> Self {
        let mut by_trigger = vec![Vec::new(); task.num_atoms];
        let mut always = Vec::new();
        for (i, a) in task.actions.iter().enumerate() {
            match a.pre_pos.first() {
                Some(&p) => by_trigger[p as usize].push(i as u32),
                None => always.push(i as u32),
            }
        }
        Successors {
            by_trigger,
            always,
            marks: vec![false; task.num_atoms],
        }
    }

    fn mark(&mut self, state: &[u32], on: bool) {
        for &a in state {
            self.marks[a as usize] = on;
        }
    }

    /// Applicable actions in ascending index order.
    fn applicable(&mut self, task: &Task, state: &[u32], out: &mut Vec<u32>) {
        out.clear();
        self.mark(state, true);
        let candidates = state
            .iter()
            .flat_map(|&a| self.by_trigger[a as usize].iter())
            .chain(self.always.iter());
        for &i in candidates {
            let a = &task.actions[i as usize];
            if a.pre_pos.iter().all(|&p| self.marks[p as usize])
                && a.pre_neg.iter().all(|&p| !self.marks[p as usize])
            {
                out.push(i);
            }
        }
        self.mark(state, false);
        out.sort_unstable();
    }

    fn is_goal(&mut self, task: &Task, state: &[u32]) -> bool {
        self.mark(state, true);
        let r = task.goal_satisfied(&self.marks);
        self.mark(state, false);
        r
    }
}

fn successor(task: &Task, state: &[u32], action: u32) -> Rc<[u32]> {
    let a = &task.actions[action as usize];
    let mut next: Vec<u32> = state
        .iter()
        .copied()
        .filter(|x| a.del.binary_search(x).is_err())
        .collect();
    next.extend_from_slice(&a.add);
    next.sort_unstable();
    next.dedup();
    next.into()
}

/// Additive delete-relaxation heuristic. Negative preconditions are ignored;
/// each violated negative goal literal adds one.
pub(crate) struct AddHeuristic {
    pre_of: Vec<Vec<u32>>,
    no_pre: Vec<u32>,
    is_goal: Vec<bool>,
    cost: Vec<u32>,
    remaining: Vec<u32>,
    acc: Vec<u32>,
    heap: BinaryHeap<Reverse<(u32, u32)>>,
    marks: Vec<bool>,
}

impl AddHeuristic {
    pub fn new(task: &Task) -> Self {
        let mut pre_of = vec![Vec::new(); task.num_atoms];
        let mut no_pre = Vec::new();
        for (i, a) in task.actions.iter().enumerate() {
            if a.pre_pos.is_empty() {
                no_pre.push(i as u32);
            }
            for &p in &a.pre_pos {
                pre_of[p as usize].push(i as u32);
            }
        }
        let mut is_goal = vec![false; task.num_atoms];
        for &g in &task.goal_pos {
            is_goal[g as usize] = true;
        }
        AddHeuristic {
            pre_of,
            no_pre,
            is_goal,
            cost: vec![INF; task.num_atoms],
            remaining: vec![0; task.actions.len()],
            acc: vec![0; task.actions.len()],
            heap: BinaryHeap::new(),
            marks: vec![false; task.num_atoms],
        }
    }

    /// `None` marks a relaxed dead end.
    pub fn eval(&mut self, task: &Task, state: &[u32]) -> Option<u64> {
        self.cost.iter_mut().for_each(|c| *c = INF);
        for (i, a) in task.actions.iter().enumerate() {
            self.remaining[i] = a.pre_pos.len() as u32;
            self.acc[i] = 0;
        }
        self.heap.clear();
        let mut goals_left = task.goal_pos.len();
        for &s in state {
            self.cost[s as usize] = 0;
            self.heap.push(Reverse((0, s)));
        }
        for &i in &self.no_pre {
            for &q in &task.actions[i as usize].add {
                if self.cost[q as usize] > 1 {
                    self.cost[q as usize] = 1;
                    self.heap.push(Reverse((1, q)));
                }
            }
        }
        while let Some(Reverse((c, p))) = self.heap.pop() {
            if c > self.cost[p as usize] {
                continue;
            }
            if self.is_goal[p as usize] {
                goals_left -= 1;
                if goals_left == 0 {
                    break;
                }
            }
            for &i in &self.pre_of[p as usize] {
                let i = i as usize;
                self.acc[i] = self.acc[i].saturating_add(c);
                self.remaining[i] -= 1;
                if self.remaining[i] == 0 {
                    let nc = self.acc[i].saturating_add(1);
                    for &q in &task.actions[i].add {
                        if nc < self.cost[q as usize] {
                            self.cost[q as usize] = nc;
                            self.heap.push(Reverse((nc, q)));
                        }
                    }
                }
            }
        }
        let mut h = 0u64;
        for &g in &task.goal_pos {
            let c = self.cost[g as usize];
            if c == INF {
                return None;
            }
            h += c as u64;
        }
        if !task.goal_neg.is_empty() {
            for &s in state {
                self.marks[s as usize] = true;
            }
            h += task
                .goal_neg
                .iter()
                .filter(|&&g| self.marks[g as usize])
                .count() as u64;
            for &s in state {
                self.marks[s as usize] = false;
            }
        }
        Some(h)
    }
}

struct Node {
    state: Rc<[u32]>,
    parent: u32,
    action: u32,
}

fn extract(nodes: &[Node], mut id: u32) -> Vec<u32> {
    let mut plan = Vec::new();
    while nodes[id as usize].parent != NONE {
        plan.push(nodes[id as usize].action);
        id = nodes[id as usize].parent;
    }
    plan.reverse();
    plan
}

/// Greedy best-first search with eager h_add evaluation; ties broken FIFO.
pub(crate) fn gbfs(task: &Task, deadline: Instant, counters: &mut SearchCounters) -> SearchOutcome {
    if task.trivially_unsolvable {
        return SearchOutcome::Unsolvable;
    }
    let mut succ = Successors::new(task);
    let mut h = AddHeuristic::new(task);
    let init: Rc<[u32]> = task.init.clone().into();
    if succ.is_goal(task, &init) {
        return SearchOutcome::Solved(Vec::new());
    }
    let Some(h0) = h.eval(task, &init) else {
        return SearchOutcome::Unsolvable;
    };
    let mut nodes = vec![Node {
        state: Rc::clone(&init),
        parent: NONE,
        action: NONE,
    }];
    let mut seen: HashSet<Rc<[u32]>> = HashSet::new();
    seen.insert(init);
    let mut open = BinaryHeap::new();
    let mut tick = 0u64;
    open.push(Reverse((h0, tick, 0u32)));
    let mut applicable = Vec::new();
    while let Some(Reverse((_, _, id))) = open.pop() {
        counters.expanded += 1;
        let state = Rc::clone(&nodes[id as usize].state);
        succ.applicable(task, &state, &mut applicable);
        for &a in &applicable {
            if Instant::now() > deadline {
                return SearchOutcome::Timeout;
            }
            let next = successor(task, &state, a);
            if seen.contains(&next) {
                continue;
            }
            counters.generated += 1;
            seen.insert(Rc::clone(&next));
            let nid = nodes.len() as u32;
            nodes.push(Node {
                state: Rc::clone(&next),
                parent: id,
                action: a,
            });
            if succ.is_goal(task, &next) {
                return SearchOutcome::Solved(extract(&nodes, nid));
            }
            if let Some(hv) = h.eval(task, &next) {
                tick += 1;
                open.push(Reverse((hv, tick, nid)));
            }
        }
    }
    SearchOutcome::Unsolvable
}

/// Breadth-first search; plans are optimal in the number of steps.
pub(crate) fn bfs(task: &Task, deadline: Instant, counters: &mut SearchCounters) -> SearchOutcome {
    if task.trivially_unsolvable {
        return SearchOutcome::Unsolvable;
    }
    let mut succ = Successors::new(task);
    let init: Rc<[u32]> = task.init.clone().into();
    if succ.is_goal(task, &init) {
        return SearchOutcome::Solved(Vec::new());
    }
    let mut nodes = vec![Node {
        state: Rc::clone(&init),
        parent: NONE,
        action: NONE,
    }];
    let mut seen: HashSet<Rc<[u32]>> = HashSet::new();
    seen.insert(init);
    let mut queue = VecDeque::from([0u32]);
    let mut applicable = Vec::new();
    while let Some(id) = queue.pop_front() {
        counters.expanded += 1;
        if counters.expanded % 256 == 0 && Instant::now() > deadline {
            return SearchOutcome::Timeout;
        }
        let state = Rc::clone(&nodes[id as usize].state);
        succ.applicable(task, &state, &mut applicable);
        for &a in &applicable {
            let next = successor(task, &state, a);
            if seen.contains(&next) {
                continue;
            }
            counters.generated += 1;
            seen.insert(Rc::clone(&next));
            let nid = nodes.len() as u32;
            nodes.push(Node {
                state: next.clone(),
                parent: id,
                action: a,
            });
            if succ.is_goal(task, &next) {
                return SearchOutcome::Solved(extract(&nodes, nid));
            }
            queue.push_back(nid);
        }
    }
    SearchOutcome::Unsolvable
}
