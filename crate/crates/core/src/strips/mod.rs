//! Typed STRIPS representation: domains, problems, states, goals and
//! ground actions, plus the PDDL-subset front end and the transition
//! simulator.
//!
//! Object types are modelled as unary properties. Every object carries
//! exactly one type atom for its declared type in the initial state.

mod ground;
mod parse;
mod print;
mod sim;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ground::ground_actions;
pub use parse::{parse_domain, parse_plan, parse_problem, ParseError, ParseErrorKind};
pub use print::{print_domain, print_plan, print_problem};
pub use sim::{applicable, apply, holds};

/// Root of the type hierarchy. It is implicit and has no type property.
pub const OBJECT_TYPE: &str = "object";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StripsError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("`{name}` expects {expected} arguments, got {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("object `{object}` of type `{found}` cannot be used as `{expected}`")]
    TypeMismatch {
        object: String,
        expected: String,
        found: String,
    },
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("goal contains both {0} and its negation")]
    ContradictoryGoal(Atom),
    #[error("type property `{0}` cannot appear in init or goal")]
    TypeAtom(String),
    #[error("action {0} is not applicable")]
    Inapplicable(String),
}

/// A ground property application such as `on(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<S: Into<String>>(predicate: S, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn mentions(&self, object: &str) -> bool {
        self.args.iter().any(|a| a == object)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// An atom together with the truth value a goal asks for.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

/// Closed-world state: the set of true atoms. Anything absent is false.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct State {
    atoms: BTreeSet<Atom>,
}

impl State {
    pub fn new() -> Self {
        State::default()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.atoms.insert(atom)
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.atoms.remove(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        State {
            atoms: iter.into_iter().collect(),
        }
    }
}

/// Partial assignment of ground atoms. Never contains an atom with both values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    literals: BTreeSet<Literal>,
}

impl Goal {
    pub fn new<I: IntoIterator<Item = Literal>>(literals: I) -> Result<Self, StripsError> {
        let literals: BTreeSet<Literal> = literals.into_iter().collect();
        for l in &literals {
            if !l.positive && literals.contains(&Literal::pos(l.atom.clone())) {
                return Err(StripsError::ContradictoryGoal(l.atom.clone()));
            }
        }
        Ok(Goal { literals })
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn has_negative(&self) -> bool {
        self.literals.iter().any(|l| !l.positive)
    }

    /// Objects named anywhere in the goal.
    pub fn objects(&self) -> BTreeSet<&str> {
        self.literals
            .iter()
            .flat_map(|l| l.atom.args.iter().map(String::as_str))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDef {
    pub name: String,
    pub parent: String,
}

/// A predicate (or type) with its argument types. Arity is 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertySchema {
    pub name: String,
    pub param_types: Vec<String>,
    /// True for the unary property standing in for an object type.
    pub is_type: bool,
}

impl PropertySchema {
    pub fn arity(&self) -> usize {
        self.param_types.len()
    }
}

/// Atom pattern inside an action schema; arguments index into the parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaAtom {
    pub predicate: String,
    pub args: Vec<usize>,
}

impl SchemaAtom {
    pub fn ground(&self, binding: &[String]) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self.args.iter().map(|&i| binding[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaLiteral {
    pub atom: SchemaAtom,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<Parameter>,
    pub preconditions: Vec<SchemaLiteral>,
    pub add_effects: Vec<SchemaAtom>,
    pub delete_effects: Vec<SchemaAtom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainModel {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDef>,
    pub predicates: Vec<PropertySchema>,
    pub actions: Vec<Arc<ActionSchema>>,
}

impl DomainModel {
    /// All properties: one unary property per declared type, then predicates.
    pub fn properties(&self) -> Vec<PropertySchema> {
        self.types
            .iter()
            .map(|t| PropertySchema {
                name: t.name.clone(),
                param_types: vec![t.name.clone()],
                is_type: true,
            })
            .chain(self.predicates.iter().cloned())
            .collect()
    }

    pub fn predicate(&self, name: &str) -> Option<&PropertySchema> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&Arc<ActionSchema>> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == OBJECT_TYPE || self.types.iter().any(|t| t.name == name)
    }

    fn parent_of(&self, name: &str) -> Option<&str> {
        self.types
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.parent.as_str())
    }

    /// Whether `sub` equals `sup` or descends from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sup == OBJECT_TYPE {
            return true;
        }
        let mut cur = sub;
        // Bounded walk: the parser rejects cycles, this guards hand-built domains.
        for _ in 0..=self.types.len() {
            if cur == sup {
                return true;
            }
            match self.parent_of(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }
}

/// A schema applied to concrete objects, e.g. `pick(ball1, rooma, left)`.
#[derive(Debug, Clone)]
pub struct GroundAction {
    pub schema: Arc<ActionSchema>,
    pub args: Vec<String>,
}

impl GroundAction {
    pub fn new(schema: Arc<ActionSchema>, args: Vec<String>) -> Self {
        debug_assert_eq!(schema.parameters.len(), args.len());
        GroundAction { schema, args }
    }

    pub fn name(&self) -> &str {
        &self.schema.name
    }

    pub fn preconditions(&self) -> impl Iterator<Item = Literal> + '_ {
        self.schema.preconditions.iter().map(|l| Literal {
            atom: l.atom.ground(&self.args),
            positive: l.positive,
        })
    }

    pub fn add_effects(&self) -> impl Iterator<Item = Atom> + '_ {
        self.schema.add_effects.iter().map(|a| a.ground(&self.args))
    }

    pub fn delete_effects(&self) -> impl Iterator<Item = Atom> + '_ {
        self.schema.delete_effects.iter().map(|a| a.ground(&self.args))
    }
}

impl PartialEq for GroundAction {
    fn eq(&self, other: &Self) -> bool {
        self.schema.name == other.schema.name && self.args == other.args
    }
}

impl Eq for GroundAction {}

impl PartialOrd for GroundAction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GroundAction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.schema.name, &self.args).cmp(&(&other.schema.name, &other.args))
    }
}

impl std::hash::Hash for GroundAction {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.schema.name.hash(state);
        self.args.hash(state);
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.schema.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<GroundAction>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A planning problem: objects with their types, initial state and goal
/// over a shared domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    domain: Arc<DomainModel>,
    objects: BTreeMap<String, String>,
    init: State,
    goal: Goal,
}

impl Problem {
    /// Builds a checked problem. `facts` must not contain type atoms; those
    /// are derived from `objects`. Names are lower-cased.
    pub fn new<F, G>(
        name: &str,
        domain: Arc<DomainModel>,
        objects: &[(String, String)],
        facts: F,
        goal: G,
    ) -> Result<Self, StripsError>
    where
        F: IntoIterator<Item = Atom>,
        G: IntoIterator<Item = Literal>,
    {
        let mut object_map = BTreeMap::new();
        for (o, t) in objects {
            let (o, t) = (o.to_lowercase(), t.to_lowercase());
            if !domain.has_type(&t) {
                return Err(StripsError::UnknownType(t));
            }
            if object_map.insert(o.clone(), t).is_some() {
                return Err(StripsError::DuplicateObject(o));
            }
        }
        let mut problem = Problem {
            name: name.to_lowercase(),
            domain,
            objects: object_map,
            init: State::new(),
            goal: Goal::default(),
        };
        for atom in facts {
            let atom = lower(atom);
            problem.check_atom(&atom)?;
            problem.init.insert(atom);
        }
        let type_atoms: Vec<Atom> = problem
            .objects
            .iter()
            .filter(|(_, t)| t.as_str() != OBJECT_TYPE)
            .map(|(o, t)| Atom::new(t.as_str(), &[o.as_str()]))
            .collect();
        for a in type_atoms {
            problem.init.insert(a);
        }
        let mut literals = Vec::new();
        for l in goal {
            let l = Literal {
                atom: lower(l.atom),
                positive: l.positive,
            };
            problem.check_atom(&l.atom)?;
            literals.push(l);
        }
        problem.goal = Goal::new(literals)?;
        Ok(problem)
    }

    /// Assembles a problem from parts already known to be consistent.
    pub(crate) fn from_parts(
        name: String,
        domain: Arc<DomainModel>,
        objects: BTreeMap<String, String>,
        init: State,
        goal: Goal,
    ) -> Self {
        Problem {
            name,
            domain,
            objects,
            init,
            goal,
        }
    }

    fn check_atom(&self, atom: &Atom) -> Result<(), StripsError> {
        let schema = match self.domain.predicate(&atom.predicate) {
            Some(s) => s,
            None if self.domain.has_type(&atom.predicate) => {
                return Err(StripsError::TypeAtom(atom.predicate.clone()))
            }
            None => return Err(StripsError::UnknownPredicate(atom.predicate.clone())),
        };
        if schema.arity() != atom.args.len() {
            return Err(StripsError::ArityMismatch {
                name: atom.predicate.clone(),
                expected: schema.arity(),
                found: atom.args.len(),
            });
        }
        for (arg, ty) in atom.args.iter().zip(&schema.param_types) {
            let found = self
                .objects
                .get(arg)
                .ok_or_else(|| StripsError::UnknownObject(arg.clone()))?;
            if !self.domain.is_subtype(found, ty) {
                return Err(StripsError::TypeMismatch {
                    object: arg.clone(),
                    expected: ty.clone(),
                    found: found.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> &Arc<DomainModel> {
        &self.domain
    }

    /// Objects with their declared types, in lexicographic order.
    pub fn objects(&self) -> &BTreeMap<String, String> {
        &self.objects
    }

    pub fn object_names(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(String::as_str)
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn init(&self) -> &State {
        &self.init
    }

    pub fn goal(&self) -> &Goal {
        &self.goal
    }

    /// Init atoms that are not type atoms.
    pub fn facts(&self) -> impl Iterator<Item = &Atom> {
        let domain = &self.domain;
        self.init
            .iter()
            .filter(move |a| domain.predicate(&a.predicate).is_some())
    }

    /// Objects of `type_name` or any of its subtypes, lexicographically.
    pub fn objects_of_type<'a>(&'a self, type_name: &'a str) -> impl Iterator<Item = &'a str> {
        self.objects
            .iter()
            .filter(move |(_, t)| self.domain.is_subtype(t, type_name))
            .map(|(o, _)| o.as_str())
    }

    /// Checks that an atom is well-typed for this problem (type atoms included).
    pub fn is_well_typed(&self, atom: &Atom) -> bool {
        if atom.args.len() == 1 && self.domain.types.iter().any(|t| t.name == atom.predicate) {
            return self.objects.get(&atom.args[0]) == Some(&atom.predicate);
        }
        self.check_atom(atom).is_ok()
    }
}

fn lower(atom: Atom) -> Atom {
    Atom {
        predicate: atom.predicate.to_lowercase(),
        args: atom.args.into_iter().map(|a| a.to_lowercase()).collect(),
    }
}
