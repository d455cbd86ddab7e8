//! Parser for the accepted PDDL subset: `:strips`, `:typing` and
//! `:negative-preconditions`, predicates of arity 1 or 2, conjunctive
//! literal preconditions and add/delete effects.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{
    ActionSchema, Atom, DomainModel, GroundAction, Literal, Parameter, Plan, Problem,
    PropertySchema, SchemaAtom, SchemaLiteral, StripsError, TypeDef, OBJECT_TYPE,
};

const ACCEPTED_REQUIREMENTS: &[&str] = &[":strips", ":typing", ":negative-preconditions"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Unsupported,
    Undeclared,
    UnknownObject,
    Arity,
    Type,
}

/// Parse diagnostic with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }

    /// Renders the diagnostic as `file:line:col: message`.
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}:{}: {}", self.line, self.col, self.message)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone)]
enum Sexp {
    Sym(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Sym(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Sym(..) => None,
        }
    }

    /// Head symbol of a list, if it has one.
    fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::sym)
    }
}

type Result<T> = std::result::Result<T, ParseError>;

fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::Syntax, pos, msg)
}

fn unsupported(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::Unsupported, pos, msg)
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let mut token = String::new();
    let mut token_pos = Pos { line, col };

    fn flush(token: &mut String, pos: Pos, stack: &mut [(Vec<Sexp>, Pos)], top: &mut Vec<Sexp>) {
        if token.is_empty() {
            return;
        }
        let sym = Sexp::Sym(token.to_lowercase(), pos);
        token.clear();
        match stack.last_mut() {
            Some((items, _)) => items.push(sym),
            None => top.push(sym),
        }
    }

    while let Some(c) = chars.next() {
        let here = Pos { line, col };
        match c {
            ';' => {
                flush(&mut token, token_pos, &mut stack, &mut top);
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                flush(&mut token, token_pos, &mut stack, &mut top);
                stack.push((Vec::new(), here));
            }
            ')' => {
                flush(&mut token, token_pos, &mut stack, &mut top);
                let (items, pos) = stack
                    .pop()
                    .ok_or_else(|| syntax(here, "unbalanced `)`"))?;
                let list = Sexp::List(items, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            c if c.is_whitespace() => flush(&mut token, token_pos, &mut stack, &mut top),
            c => {
                if token.is_empty() {
                    token_pos = here;
                }
                token.push(c);
            }
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    flush(&mut token, token_pos, &mut stack, &mut top);
    if let Some((_, pos)) = stack.last() {
        return Err(syntax(*pos, "unclosed `(`"));
    }
    Ok(top)
}

fn single_define(text: &str, what: &str) -> Result<(Vec<Sexp>, Pos)> {
    let top = read_sexps(text)?;
    let mut iter = top.into_iter();
    let def = iter
        .next()
        .ok_or_else(|| syntax(Pos { line: 1, col: 1 }, format!("expected a {what} definition")))?;
    if let Some(extra) = iter.next() {
        return Err(syntax(extra.pos(), "unexpected text after definition"));
    }
    let pos = def.pos();
    match def {
        Sexp::List(items, pos) if items.first().and_then(Sexp::sym) == Some("define") => {
            Ok((items, pos))
        }
        _ => Err(syntax(pos, "expected `(define ...)`")),
    }
}

fn header_name(sexp: Option<&Sexp>, keyword: &str, pos: Pos) -> Result<String> {
    let items = sexp
        .and_then(Sexp::list)
        .ok_or_else(|| syntax(pos, format!("expected `({keyword} <name>)`")))?;
    match items {
        [Sexp::Sym(k, _), Sexp::Sym(name, _)] if k == keyword => Ok(name.clone()),
        _ => Err(syntax(
            sexp.map_or(pos, Sexp::pos),
            format!("expected `({keyword} <name>)`"),
        )),
    }
}

/// Parses `a b - t c - u d` into `(name, type, pos)` triples.
fn typed_list(items: &[Sexp]) -> Result<Vec<(String, String, Pos)>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        let s = item
            .sym()
            .ok_or_else(|| syntax(item.pos(), "expected a name"))?;
        if s == "-" {
            if items.get(i + 1).and_then(Sexp::list).is_some() {
                return Err(unsupported(item.pos(), "`either` types are not supported"));
            }
            let ty = items
                .get(i + 1)
                .and_then(Sexp::sym)
                .ok_or_else(|| syntax(item.pos(), "expected a type after `-`"))?;
            if pending.is_empty() {
                return Err(syntax(item.pos(), "`-` without preceding names"));
            }
            for (name, pos) in pending.drain(..) {
                out.push((name, ty.to_string(), pos));
            }
            i += 2;
        } else {
            pending.push((s.to_string(), item.pos()));
            i += 1;
        }
    }
    for (name, pos) in pending {
        out.push((name, OBJECT_TYPE.to_string(), pos));
    }
    Ok(out)
}

/// Parses a domain in the accepted PDDL subset.
pub fn parse_domain(text: &str) -> Result<DomainModel> {
    let (items, pos) = single_define(text, "domain")?;
    let name = header_name(items.get(1), "domain", pos)?;
    let mut domain = DomainModel {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut type_positions = Vec::new();
    for section in &items[2..] {
        let head = section
            .head()
            .ok_or_else(|| syntax(section.pos(), "expected a domain section"))?;
        let body = &section.list().unwrap()[1..];
        match head {
            ":requirements" => {
                for r in body {
                    let r_name = r
                        .sym()
                        .ok_or_else(|| syntax(r.pos(), "expected a requirement flag"))?;
                    if !ACCEPTED_REQUIREMENTS.contains(&r_name) {
                        return Err(unsupported(
                            r.pos(),
                            format!("unsupported requirement `{r_name}`"),
                        ));
                    }
                    domain.requirements.push(r_name.to_string());
                }
            }
            ":types" => {
                for (t, parent, p) in typed_list(body)? {
                    if t == OBJECT_TYPE {
                        continue;
                    }
                    if domain.types.iter().any(|d| d.name == t) {
                        return Err(syntax(p, format!("duplicate type `{t}`")));
                    }
                    domain.types.push(TypeDef { name: t, parent });
                    type_positions.push(p);
                }
            }
            ":predicates" => {
                for pred in body {
                    domain.predicates.push(parse_predicate(pred, &domain)?);
                }
            }
            ":action" => {
                let action = parse_action(section, &domain)?;
                if domain.action(&action.name).is_some() {
                    return Err(syntax(section.pos(), format!("duplicate action `{}`", action.name)));
                }
                domain.actions.push(Arc::new(action));
            }
            ":constants" => return Err(unsupported(section.pos(), "`:constants` are not supported")),
            ":functions" => {
                return Err(unsupported(section.pos(), "numeric fluents are not supported"))
            }
            other => {
                return Err(unsupported(
                    section.pos(),
                    format!("unsupported domain section `{other}`"),
                ))
            }
        }
    }
    for (t, p) in domain.types.iter().zip(&type_positions) {
        if !domain.has_type(&t.parent) {
            return Err(ParseError::new(
                ParseErrorKind::Undeclared,
                *p,
                format!("undeclared parent type `{}`", t.parent),
            ));
        }
        if domain.is_subtype(&t.parent, &t.name) {
            return Err(syntax(*p, format!("cyclic type hierarchy at `{}`", t.name)));
        }
    }
    Ok(domain)
}

fn parse_predicate(sexp: &Sexp, domain: &DomainModel) -> Result<PropertySchema> {
    let items = sexp
        .list()
        .ok_or_else(|| syntax(sexp.pos(), "expected `(predicate ?args...)`"))?;
    let name = items
        .first()
        .and_then(Sexp::sym)
        .ok_or_else(|| syntax(sexp.pos(), "expected a predicate name"))?;
    let params = typed_list(&items[1..])?;
    if params.is_empty() || params.len() > 2 {
        return Err(unsupported(
            sexp.pos(),
            format!(
                "predicate `{name}` has arity {}; only arity 1 or 2 is supported",
                params.len()
            ),
        ));
    }
    if domain.predicate(name).is_some() {
        return Err(syntax(sexp.pos(), format!("duplicate predicate `{name}`")));
    }
    if domain.types.iter().any(|t| t.name == name) {
        return Err(syntax(sexp.pos(), format!("predicate `{name}` clashes with a type")));
    }
    let mut param_types = Vec::new();
    for (var, ty, p) in params {
        if !var.starts_with('?') {
            return Err(syntax(p, format!("expected a variable, found `{var}`")));
        }
        if !domain.has_type(&ty) {
            return Err(ParseError::new(
                ParseErrorKind::Undeclared,
                p,
                format!("undeclared type `{ty}`"),
            ));
        }
        param_types.push(ty);
    }
    Ok(PropertySchema {
        name: name.to_string(),
        param_types,
        is_type: false,
    })
}

fn parse_action(sexp: &Sexp, domain: &DomainModel) -> Result<ActionSchema> {
    let items = sexp.list().unwrap();
    let name = items
        .get(1)
        .and_then(Sexp::sym)
        .ok_or_else(|| syntax(sexp.pos(), "expected an action name"))?
        .to_string();
    let mut parameters = Vec::new();
    let mut preconditions = Vec::new();
    let mut add_effects = Vec::new();
    let mut delete_effects = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = items[i]
            .sym()
            .ok_or_else(|| syntax(items[i].pos(), "expected an action keyword"))?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| syntax(items[i].pos(), format!("missing value for `{key}`")))?;
        match key {
            ":parameters" => {
                let list = value
                    .list()
                    .ok_or_else(|| syntax(value.pos(), "expected a parameter list"))?;
                for (var, ty, p) in typed_list(list)? {
                    if !var.starts_with('?') {
                        return Err(syntax(p, format!("expected a variable, found `{var}`")));
                    }
                    if !domain.has_type(&ty) {
                        return Err(ParseError::new(
                            ParseErrorKind::Undeclared,
                            p,
                            format!("undeclared type `{ty}`"),
                        ));
                    }
                    if parameters.iter().any(|q: &Parameter| q.name == var) {
                        return Err(syntax(p, format!("duplicate parameter `{var}`")));
                    }
                    parameters.push(Parameter {
                        name: var,
                        type_name: ty,
                    });
                }
            }
            ":precondition" => {
                let mut out = Vec::new();
                collect_literals(value, &mut out, "precondition")?;
                for (lit, positive) in out {
                    let atom = schema_atom(lit, &parameters, domain)?;
                    preconditions.push(SchemaLiteral { atom, positive });
                }
            }
            ":effect" => {
                let mut out = Vec::new();
                collect_literals(value, &mut out, "effect")?;
                for (lit, positive) in out {
                    let atom = schema_atom(lit, &parameters, domain)?;
                    if positive {
                        add_effects.push(atom);
                    } else {
                        delete_effects.push(atom);
                    }
                }
            }
            other => {
                return Err(unsupported(
                    items[i].pos(),
                    format!("unsupported action keyword `{other}`"),
                ))
            }
        }
        i += 2;
    }
    Ok(ActionSchema {
        name,
        parameters,
        preconditions,
        add_effects,
        delete_effects,
    })
}

/// Flattens nested conjunctions of (possibly negated) atoms.
fn collect_literals<'a>(
    sexp: &'a Sexp,
    out: &mut Vec<(&'a Sexp, bool)>,
    context: &str,
) -> Result<()> {
    let items = sexp
        .list()
        .ok_or_else(|| syntax(sexp.pos(), format!("expected a {context} formula")))?;
    match items.first().and_then(Sexp::sym) {
        None if items.is_empty() => Ok(()),
        None => Err(syntax(sexp.pos(), format!("malformed {context}"))),
        Some("and") => {
            for part in &items[1..] {
                collect_literals(part, out, context)?;
            }
            Ok(())
        }
        Some("not") => {
            let inner = match items {
                [_, inner] => inner,
                _ => return Err(syntax(sexp.pos(), "`not` takes exactly one atom")),
            };
            match inner.head() {
                Some(h) if is_connective(h) => Err(unsupported(
                    inner.pos(),
                    format!("negated `{h}` is not supported"),
                )),
                _ => {
                    out.push((inner, false));
                    Ok(())
                }
            }
        }
        Some(h @ ("when" | "forall" | "exists" | "or" | "imply")) => Err(unsupported(
            sexp.pos(),
            format!("`{h}` in {context} is not supported"),
        )),
        Some(h @ ("increase" | "decrease" | "assign" | "scale-up" | "scale-down")) => Err(
            unsupported(sexp.pos(), format!("numeric effect `{h}` is not supported")),
        ),
        Some("=") => Err(unsupported(sexp.pos(), "equality is not supported")),
        Some(_) => {
            out.push((sexp, true));
            Ok(())
        }
    }
}

fn is_connective(h: &str) -> bool {
    matches!(
        h,
        "and" | "not" | "or" | "when" | "forall" | "exists" | "imply" | "="
    )
}

fn schema_atom(sexp: &Sexp, params: &[Parameter], domain: &DomainModel) -> Result<SchemaAtom> {
    let items = sexp
        .list()
        .ok_or_else(|| syntax(sexp.pos(), "expected an atom"))?;
    let name = items
        .first()
        .and_then(Sexp::sym)
        .ok_or_else(|| syntax(sexp.pos(), "expected a predicate name"))?;
    let pred = domain.predicate(name).ok_or_else(|| {
        ParseError::new(
            ParseErrorKind::Undeclared,
            sexp.pos(),
            format!("undeclared predicate `{name}`"),
        )
    })?;
    let args = &items[1..];
    if args.len() != pred.arity() {
        return Err(ParseError::new(
            ParseErrorKind::Arity,
            sexp.pos(),
            format!(
                "`{name}` expects {} arguments, got {}",
                pred.arity(),
                args.len()
            ),
        ));
    }
    let mut indices = Vec::new();
    for (arg, expected) in args.iter().zip(&pred.param_types) {
        let var = arg
            .sym()
            .ok_or_else(|| syntax(arg.pos(), "expected a variable"))?;
        if !var.starts_with('?') {
            return Err(unsupported(
                arg.pos(),
                format!("constant `{var}` in action schema is not supported"),
            ));
        }
        let idx = params.iter().position(|p| p.name == var).ok_or_else(|| {
            ParseError::new(
                ParseErrorKind::Undeclared,
                arg.pos(),
                format!("undeclared parameter `{var}`"),
            )
        })?;
        if !domain.is_subtype(&params[idx].type_name, expected) {
            return Err(ParseError::new(
                ParseErrorKind::Type,
                arg.pos(),
                format!(
                    "parameter `{var}` of type `{}` cannot be used as `{expected}` in `{name}`",
                    params[idx].type_name
                ),
            ));
        }
        indices.push(idx);
    }
    Ok(SchemaAtom {
        predicate: name.to_string(),
        args: indices,
    })
}

fn ground_atom(sexp: &Sexp, objects: &BTreeMap<String, String>, domain: &DomainModel) -> Result<Atom> {
    let items = sexp
        .list()
        .ok_or_else(|| syntax(sexp.pos(), "expected an atom"))?;
    let name = items
        .first()
        .and_then(Sexp::sym)
        .ok_or_else(|| syntax(sexp.pos(), "expected a predicate name"))?;
    if name == "=" {
        return Err(unsupported(sexp.pos(), "equality is not supported"));
    }
    let pred = match domain.predicate(name) {
        Some(p) => p,
        None if domain.has_type(name) => {
            return Err(ParseError::new(
                ParseErrorKind::Type,
                sexp.pos(),
                format!("type `{name}` cannot be used as a fact"),
            ))
        }
        None => {
            return Err(ParseError::new(
                ParseErrorKind::Undeclared,
                sexp.pos(),
                format!("undeclared predicate `{name}`"),
            ))
        }
    };
    let args = &items[1..];
    if args.len() != pred.arity() {
        return Err(ParseError::new(
            ParseErrorKind::Arity,
            sexp.pos(),
            format!(
                "`{name}` expects {} arguments, got {}",
                pred.arity(),
                args.len()
            ),
        ));
    }
    let mut out = Vec::new();
    for (arg, expected) in args.iter().zip(&pred.param_types) {
        let obj = arg
            .sym()
            .ok_or_else(|| syntax(arg.pos(), "expected an object name"))?;
        let ty = objects.get(obj).ok_or_else(|| {
            ParseError::new(
                ParseErrorKind::UnknownObject,
                arg.pos(),
                format!("unknown object `{obj}`"),
            )
        })?;
        if !domain.is_subtype(ty, expected) {
            return Err(ParseError::new(
                ParseErrorKind::Type,
                arg.pos(),
                format!("object `{obj}` of type `{ty}` cannot be used as `{expected}` in `{name}`"),
            ));
        }
        out.push(obj.to_string());
    }
    Ok(Atom {
        predicate: name.to_string(),
        args: out,
    })
}

/// Parses a problem against an already parsed domain.
pub fn parse_problem(text: &str, domain: &Arc<DomainModel>) -> Result<Problem> {
    let (items, pos) = single_define(text, "problem")?;
    let name = header_name(items.get(1), "problem", pos)?;
    let mut objects: Vec<(String, String)> = Vec::new();
    let mut object_map = BTreeMap::new();
    let mut init_sexps: Vec<&Sexp> = Vec::new();
    let mut goal_sexp: Option<&Sexp> = None;
    for section in &items[2..] {
        let head = section
            .head()
            .ok_or_else(|| syntax(section.pos(), "expected a problem section"))?;
        let body = &section.list().unwrap()[1..];
        match head {
            ":domain" => {
                let d = body
                    .first()
                    .and_then(Sexp::sym)
                    .ok_or_else(|| syntax(section.pos(), "expected a domain name"))?;
                if d != domain.name {
                    return Err(syntax(
                        section.pos(),
                        format!("problem is for domain `{d}`, not `{}`", domain.name),
                    ));
                }
            }
            ":requirements" => {}
            ":objects" => {
                for (o, t, p) in typed_list(body)? {
                    if !domain.has_type(&t) {
                        return Err(ParseError::new(
                            ParseErrorKind::Undeclared,
                            p,
                            format!("undeclared type `{t}`"),
                        ));
                    }
                    if object_map.insert(o.clone(), t.clone()).is_some() {
                        return Err(syntax(p, format!("duplicate object `{o}`")));
                    }
                    objects.push((o, t));
                }
            }
            ":init" => init_sexps.extend(body.iter()),
            ":goal" => {
                goal_sexp = Some(
                    body.first()
                        .ok_or_else(|| syntax(section.pos(), "empty goal section"))?,
                )
            }
            ":metric" => return Err(unsupported(section.pos(), "`:metric` is not supported")),
            other => {
                return Err(unsupported(
                    section.pos(),
                    format!("unsupported problem section `{other}`"),
                ))
            }
        }
    }
    let mut facts = Vec::new();
    for s in init_sexps {
        if s.head() == Some("not") {
            return Err(unsupported(s.pos(), "negative init facts are implicit (closed world)"));
        }
        facts.push(ground_atom(s, &object_map, domain)?);
    }
    let mut goal = Vec::new();
    if let Some(g) = goal_sexp {
        let mut lits = Vec::new();
        collect_literals(g, &mut lits, "goal")?;
        for (s, positive) in lits {
            goal.push(Literal {
                atom: ground_atom(s, &object_map, domain)?,
                positive,
            });
        }
    }
    let gpos = goal_sexp.map_or(pos, Sexp::pos);
    Problem::new(&name, Arc::clone(domain), &objects, facts, goal).map_err(|e| match e {
        StripsError::ContradictoryGoal(a) => {
            syntax(gpos, format!("goal contains both {a} and its negation"))
        }
        other => syntax(pos, other.to_string()),
    })
}

/// Parses a plan file: one `(action arg...)` per line, `;` comments ignored.
pub fn parse_plan(text: &str, problem: &Problem) -> std::result::Result<Plan, (usize, String)> {
    let mut steps = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split(';').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| (lineno + 1, msg);
        let inner = line
            .strip_prefix('(')
            .and_then(|l| l.strip_suffix(')'))
            .ok_or_else(|| bad(format!("expected `(action args...)`, found `{line}`")))?;
        let mut words = inner.split_whitespace().map(str::to_lowercase);
        let name = words.next().ok_or_else(|| bad("empty action".into()))?;
        let schema = problem
            .domain()
            .action(&name)
            .ok_or_else(|| bad(format!("unknown action `{name}`")))?;
        let args: Vec<String> = words.collect();
        if args.len() != schema.parameters.len() {
            return Err(bad(format!(
                "`{name}` expects {} arguments, got {}",
                schema.parameters.len(),
                args.len()
            )));
        }
        for (a, p) in args.iter().zip(&schema.parameters) {
            let ty = problem
                .objects()
                .get(a)
                .ok_or_else(|| bad(format!("unknown object `{a}`")))?;
            if !problem.domain().is_subtype(ty, &p.type_name) {
                return Err(bad(format!("object `{a}` is not a `{}`", p.type_name)));
            }
        }
        steps.push(GroundAction::new(Arc::clone(schema), args));
    }
    Ok(Plan { steps })
}
