#![allow(dead_code)]

use kipg_core::logic::{Clause, Entity, EntityType, FactBase, Pred};
use kipg_core::rng;

/// Random micro-world with up to `n` entities of each type.
pub fn random_world(seed: u64, n: usize) -> FactBase {
    let draw = |k: &[u64]| rng::unit(&[&[seed][..], k].concat());
    let count = |ty: u64| 1 + (draw(&[ty]) * n as f64) as usize % n;
    let persons = count(1);
    let homes = count(2);
    let res = count(3);
    let shops = count(4);
    let works = count(5);
    let mut f = FactBase::new();
    let e = |ty, i: usize| Entity::new(ty, i as u32);
    for p in 0..persons {
        if draw(&[10, p as u64]) < 0.8 {
            f.insert(Pred::Pin, &[e(EntityType::Person, p), e(EntityType::Home, (draw(&[11, p as u64]) * homes as f64) as usize)]);
        }
        if draw(&[12, p as u64]) < 0.3 {
            f.insert(Pred::Hospitalized, &[e(EntityType::Person, p)]);
        }
        if draw(&[13, p as u64]) < 0.3 {
            f.insert(Pred::Quarantined, &[e(EntityType::Person, p)]);
        }
    }
    for h in 0..homes {
        f.insert(Pred::Hin, &[e(EntityType::Home, h), e(EntityType::Res, (draw(&[20, h as u64]) * res as f64) as usize)]);
        if draw(&[21, h as u64]) < 0.7 {
            f.insert(Pred::Hopen, &[e(EntityType::Home, h)]);
        }
    }
    let places: Vec<Entity> = (0..res)
        .map(|i| e(EntityType::Res, i))
        .chain((0..shops).map(|i| e(EntityType::Shop, i)))
        .chain((0..works).map(|i| e(EntityType::Work, i)))
        .collect();
    for (i, a) in places.iter().enumerate() {
        for (j, b) in places.iter().enumerate() {
            if i != j && draw(&[30, i as u64, j as u64]) < 0.3 {
                f.insert(Pred::Same, &[*a, *b]);
            }
        }
    }
    for (pred, ty, k, m) in [
        (Pred::Ropen, EntityType::Res, 40u64, res),
        (Pred::Sopen, EntityType::Shop, 41, shops),
        (Pred::Wopen, EntityType::Work, 42, works),
    ] {
        for i in 0..m {
            if draw(&[k, i as u64]) < 0.7 {
                f.insert(pred, &[e(ty, i)]);
            }
        }
    }
    f
}

/// Cross-product enumeration: every assignment of typed entities to the
/// clause variables, counted when all literals are present as facts.
pub fn naive_count(facts: &FactBase, clause: &Clause) -> u64 {
    let types = clause.var_types().unwrap();
    let entities = facts.entities();
    let domains: Vec<Vec<Entity>> = types
        .iter()
        .map(|&t| entities.iter().copied().filter(|e| t.unify(e.ty).is_some()).collect())
        .collect();
    let mut assignment = vec![0usize; types.len()];
    let mut total = 0;
    if domains.iter().any(|d| d.is_empty()) {
        return 0;
    }
    loop {
        let holds = clause.literals.iter().all(|lit| {
            let args: Vec<Entity> = lit.args.iter().map(|v| domains[v.0 as usize][assignment[v.0 as usize]]).collect();
            facts.contains(lit.pred, &args)
        });
        total += holds as u64;
        let mut i = 0;
        loop {
            if i == assignment.len() {
                return total;
            }
            assignment[i] += 1;
            if assignment[i] < domains[i].len() {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}
