//! Grounding counts by backtracking conjunctive join.

use super::clause::{Clause, Literal};
use super::facts::{Entity, FactBase};

/// Number of distinct variable bindings satisfying every literal of
/// `clause` against `facts`.
///
/// Each complete join path fixes one tuple per literal and, since all
/// arguments are variables, one binding; facts are a set, so paths and
/// bindings are in bijection and the path count is the binding count.
pub fn count_groundings(facts: &FactBase, clause: &Clause) -> u64 {
    if clause.literals.is_empty() {
        return 1;
    }
    let order = join_order(facts, &clause.literals);
    let mut binding: Vec<Option<Entity>> = vec![None; clause.num_vars()];
    count_rec(facts, &order, 0, &mut binding)
}

fn count_rec(
    facts: &FactBase,
    order: &[&Literal],
    depth: usize,
    binding: &mut Vec<Option<Entity>>,
) -> u64 {
    let Some(lit) = order.get(depth) else {
        return 1;
    };
    let mut total = 0;
    for tuple in facts.tuples(lit.pred) {
        let mut newly_bound = [usize::MAX; 2];
        let mut ok = true;
        for (slot, v) in lit.args.iter().enumerate() {
            let value = tuple[slot].expect("tuple arity matches predicate");
            let var = v.0 as usize;
            match binding[var] {
                Some(b) if b != value => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    binding[var] = Some(value);
                    newly_bound[slot] = var;
                }
            }
        }
        if ok {
            total += count_rec(facts, order, depth + 1, binding);
        }
        for var in newly_bound {
            if var != usize::MAX {
                binding[var] = None;
            }
        }
    }
    total
}

/// Greedy order: smallest relation first, then literals sharing the most
/// already-bound variables.
fn join_order<'a>(facts: &FactBase, literals: &'a [Literal]) -> Vec<&'a Literal> {
    let mut remaining: Vec<&Literal> = literals.iter().collect();
    let mut bound: Vec<u8> = Vec::new();
    let mut order = Vec::with_capacity(literals.len());
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, l)| {
                let shared = l.args.iter().filter(|v| bound.contains(&v.0)).count();
                (usize::MAX - shared, facts.tuples(l.pred).len())
            })
            .unwrap();
        let lit = remaining.remove(pos);
        bound.extend(lit.args.iter().map(|v| v.0));
        order.push(lit);
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::schema::{EntityType::*, Pred};

    fn e(ty: crate::logic::schema::EntityType, i: u32) -> Entity {
        Entity::new(ty, i)
    }

    fn small_world() -> FactBase {
        let mut f = FactBase::new();
        f.insert(Pred::Same, &[e(Res, 1), e(Shop, 1)]);
        f.insert(Pred::Hin, &[e(Home, 1), e(Res, 1)]);
        f.insert(Pred::Pin, &[e(Person, 1), e(Home, 1)]);
        f.insert(Pred::Pin, &[e(Person, 2), e(Home, 1)]);
        f
    }

    #[test]
    fn interaction_clause_counts_two_persons() {
        let c = Clause::parse(1, "same(State,Res,Shop) ^ pin(State,Person,Home) ^ hin(State,Home,Res)").unwrap();
        assert_eq!(count_groundings(&small_world(), &c), 2);
    }

    #[test]
    fn irrelevant_fact_does_not_change_count() {
        let c = Clause::parse(1, "same(State,Res,Shop) ^ pin(State,Person,Home) ^ hin(State,Home,Res)").unwrap();
        let mut f = small_world();
        f.insert(Pred::Quarantined, &[e(Person, 9)]);
        assert_eq!(count_groundings(&f, &c), 2);
    }

    #[test]
    fn empty_relation_counts_zero() {
        let c = Clause::parse(3, "sopen(State,Shop)").unwrap();
        assert_eq!(count_groundings(&small_world(), &c), 0);
    }

    #[test]
    fn duplicate_inserts_are_ignored() {
        let mut f = small_world();
        f.insert(Pred::Pin, &[e(Person, 2), e(Home, 1)]);
        let c = Clause::parse(0, "pin(State,P,H)").unwrap();
        assert_eq!(count_groundings(&f, &c), 2);
    }
}
