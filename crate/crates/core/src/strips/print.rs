use std::fmt::Write;

use super::{DomainModel, Plan, Problem, SchemaAtom, OBJECT_TYPE};

fn schema_atom(out: &mut String, atom: &SchemaAtom, vars: &[String]) {
    out.push('(');
    out.push_str(&atom.predicate);
    for &i in &atom.args {
        out.push(' ');
        out.push_str(&vars[i]);
    }
    out.push(')');
}

pub fn print_domain(domain: &DomainModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", domain.name);
    if !domain.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", domain.requirements.join(" "));
    }
    if !domain.types.is_empty() {
        out.push_str("  (:types");
        for t in &domain.types {
            let _ = write!(out, " {} - {}", t.name, t.parent);
        }
        out.push_str(")\n");
    }
    out.push_str("  (:predicates");
    for p in &domain.predicates {
        let _ = write!(out, "\n    ({}", p.name);
        for (i, t) in p.param_types.iter().enumerate() {
            let _ = write!(out, " ?a{i} - {t}");
        }
        out.push(')');
    }
    out.push_str(")\n");
    for a in &domain.actions {
        let vars: Vec<String> = a.parameters.iter().map(|p| p.name.clone()).collect();
        let _ = writeln!(out, "  (:action {}", a.name);
        out.push_str("    :parameters (");
        let params: Vec<String> = a
            .parameters
            .iter()
            .map(|p| format!("{} - {}", p.name, p.type_name))
            .collect();
        out.push_str(&params.join(" "));
        out.push_str(")\n    :precondition (and");
        for l in &a.preconditions {
            out.push(' ');
            if l.positive {
                schema_atom(&mut out, &l.atom, &vars);
            } else {
                out.push_str("(not ");
                schema_atom(&mut out, &l.atom, &vars);
                out.push(')');
            }
        }
        out.push_str(")\n    :effect (and");
        for e in &a.add_effects {
            out.push(' ');
            schema_atom(&mut out, e, &vars);
        }
        for e in &a.delete_effects {
            out.push_str(" (not ");
            schema_atom(&mut out, e, &vars);
            out.push(')');
        }
        out.push_str("))\n");
    }
    out.push_str(")\n");
    out
}

/// Writes a problem; type atoms are implied by the object declarations.
pub fn print_problem(problem: &Problem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", problem.name);
    let _ = writeln!(out, "  (:domain {})", problem.domain().name);
    out.push_str("  (:objects");
    for (o, t) in problem.objects() {
        if t == OBJECT_TYPE {
            let _ = write!(out, "\n    {o}");
        } else {
            let _ = write!(out, "\n    {o} - {t}");
        }
    }
    out.push_str(")\n  (:init");
    for a in problem.facts() {
        let _ = write!(out, "\n    {a}");
    }
    out.push_str(")\n  (:goal (and");
    for l in problem.goal().literals() {
        let _ = write!(out, "\n    {l}");
    }
    out.push_str(")))\n");
    out
}

pub fn print_plan(plan: &Plan) -> String {
    let mut out = String::new();
    for step in &plan.steps {
        let _ = writeln!(out, "{step}");
    }
    out
}
