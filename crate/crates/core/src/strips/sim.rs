use super::{GroundAction, Goal, State, StripsError};

/// True iff every positive precondition holds and every negative one does not.
pub fn applicable(state: &State, action: &GroundAction) -> bool {
    action
        .preconditions()
        .all(|l| state.contains(&l.atom) == l.positive)
}

/// STRIPS successor: `(state \ del) ∪ add`. The input is left untouched.
pub fn apply(state: &State, action: &GroundAction) -> Result<State, StripsError> {
    if !applicable(state, action) {
        return Err(StripsError::Inapplicable(action.to_string()));
    }
    let mut next = state.clone();
    for a in action.delete_effects() {
        next.remove(&a);
    }
    for a in action.add_effects() {
        next.insert(a);
    }
    Ok(next)
}

pub fn holds(state: &State, goal: &Goal) -> bool {
    goal.literals().all(|l| state.contains(&l.atom) == l.positive)
}
