//! Exhaustive mode-guided clause search.

use std::collections::HashSet;

use super::clause::{Clause, Literal, Var};
use super::schema::{ArgMode, EntityType, ModeDeclaration, Schema};

/// All connected, mode-valid clauses of 1..=`max_len` literals, one
/// representative per alpha-equivalence class, sorted by length and then
/// lexicographically by predicate name and argument positions. Ids are
/// assigned 1.. in that order.
pub fn enumerate_clauses(schema: &Schema, modes: &ModeDeclaration, max_len: usize) -> Vec<Clause> {
    let mut seen: HashSet<Vec<Literal>> = HashSet::new();
    let mut all: Vec<Clause> = Vec::new();
    let mut frontier: Vec<Clause> = vec![Clause::new(0, Vec::new())];

    for _ in 0..max_len {
        let mut next = Vec::new();
        for clause in &frontier {
            let types = clause.var_types().expect("enumerated clauses are well typed");
            for decl in &schema.predicates {
                for lit in extensions(&types, decl.pred, modes) {
                    if clause.literals.contains(&lit) {
                        continue;
                    }
                    let mut literals = clause.literals.clone();
                    literals.push(lit);
                    let canonical = Clause::new(0, literals).canonical();
                    if seen.insert(canonical.literals.clone()) {
                        next.push(canonical);
                    }
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }

    all.sort_by(|a, b| (a.len(), &a.literals).cmp(&(b.len(), &b.literals)));
    for (i, c) in all.iter_mut().enumerate() {
        c.id = i + 1;
    }
    all
}

/// Candidate literals for `pred` that respect modes and types and share at
/// least one existing variable (unless there are none yet).
fn extensions(
    types: &[EntityType],
    pred: super::schema::Pred,
    modes: &ModeDeclaration,
) -> Vec<Literal> {
    let arg_types = pred.arg_types();
    let arg_modes = modes.modes(pred);
    let n_existing = types.len();
    let mut out = Vec::new();
    let mut current: Vec<Var> = Vec::with_capacity(arg_types.len());

    #[allow(clippy::too_many_arguments)]
    fn rec(
        pos: usize,
        arg_types: &[EntityType],
        arg_modes: &[ArgMode],
        types: &[EntityType],
        n_existing: usize,
        fresh: u8,
        current: &mut Vec<Var>,
        pred: super::schema::Pred,
        out: &mut Vec<Literal>,
    ) {
        if pos == arg_types.len() {
            let shares = current.iter().any(|v| (v.0 as usize) < n_existing);
            if shares || n_existing == 0 {
                out.push(Literal { pred, args: current.clone() });
            }
            return;
        }
        let ty = arg_types[pos];
        for (v, &vt) in types.iter().enumerate() {
            let var = Var(v as u8);
            if vt.unify(ty).is_some() && !current.contains(&var) {
                current.push(var);
                rec(pos + 1, arg_types, arg_modes, types, n_existing, fresh, current, pred, out);
                current.pop();
            }
        }
        let mode = arg_modes.get(pos).copied().unwrap_or(ArgMode::Output);
        if mode == ArgMode::Output {
            current.push(Var(fresh));
            rec(pos + 1, arg_types, arg_modes, types, n_existing, fresh + 1, current, pred, out);
            current.pop();
        }
    }

    rec(
        0,
        arg_types,
        arg_modes,
        types,
        n_existing,
        n_existing as u8,
        &mut current,
        pred,
        &mut out,
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::schema::Pred;

    #[test]
    fn single_unary_predicate() {
        let clauses = enumerate_clauses(&Schema::only(&[Pred::Sopen]), &ModeDeclaration::default(), 1);
        assert_eq!(clauses.len(), 1);
        assert_eq!(clauses[0].to_string(), "sopen(State,Shop)");
        assert_eq!(clauses[0].id, 1);
    }

    #[test]
    fn one_clause_per_predicate_at_length_one() {
        let clauses = enumerate_clauses(&Schema::full(), &ModeDeclaration::default(), 1);
        assert_eq!(clauses.len(), 9);
        let names: Vec<_> = clauses.iter().map(|c| c.literals[0].pred.name()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn input_modes_restrict_first_literal() {
        let modes = ModeDeclaration::default().with(Pred::Hospitalized, vec![ArgMode::Input]);
        let clauses = enumerate_clauses(&Schema::only(&[Pred::Hospitalized, Pred::Pin]), &modes, 2);
        assert!(clauses
            .iter()
            .all(|c| c.literals.len() > 1 || c.literals[0].pred != Pred::Hospitalized));
        assert!(clauses
            .iter()
            .any(|c| c.to_string() == "pin(State,Person,Home) ^ hospitalized(State,Person)"
                || c.to_string() == "hospitalized(State,Person) ^ pin(State,Person,Home)"));
    }

    #[test]
    fn output_is_connected_and_duplicate_free() {
        let clauses = enumerate_clauses(&Schema::full(), &ModeDeclaration::default(), 3);
        let mut keys = HashSet::new();
        for c in &clauses {
            assert!(c.is_connected_in_order(), "{c}");
            assert!(keys.insert(c.canonical().literals), "duplicate {c}");
        }
    }
}
