use std::sync::Arc;

use super::{GroundAction, Problem};

/// Every type-consistent instantiation of every action schema, ordered by
/// schema name and then lexicographically by argument tuple.
pub fn ground_actions(problem: &Problem) -> Vec<GroundAction> {
    let mut schemas: Vec<_> = problem.domain().actions.iter().collect();
    schemas.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = Vec::new();
    for schema in schemas {
        let candidates: Vec<Vec<&str>> = schema
            .parameters
            .iter()
            .map(|p| problem.objects_of_type(&p.type_name).collect())
            .collect();
        if candidates.iter().any(Vec::is_empty) {
            continue;
        }
        // Odometer over the candidate lists; objects are already sorted.
        let mut idx = vec![0usize; candidates.len()];
        loop {
            let args = idx
                .iter()
                .zip(&candidates)
                .map(|(&i, c)| c[i].to_string())
                .collect();
            out.push(GroundAction::new(Arc::clone(schema), args));
            let mut pos = idx.len();
            let exhausted = loop {
                if pos == 0 {
                    break true;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < candidates[pos].len() {
                    break false;
                }
                idx[pos] = 0;
            };
            if exhausted {
                break;
            }
        }
    }
    out
}
