//! Ground literals of one observed state.

use std::fmt;

use super::schema::{EntityType, Pred};

/// A typed constant such as `shop0` or `person12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entity {
    pub ty: EntityType,
    pub idx: u32,
}

impl Entity {
    pub fn new(ty: EntityType, idx: u32) -> Self {
        Entity { ty, idx }
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.ty {
            EntityType::State => "s",
            EntityType::Person => "person",
            EntityType::Home => "home",
            EntityType::Res => "res",
            EntityType::Shop => "shop",
            EntityType::Work => "work",
            EntityType::Route => "route",
            EntityType::Place => "place",
        };
        write!(f, "{prefix}{}", self.idx)
    }
}

/// Non-State arguments of a ground literal. Unary predicates leave the
/// second slot `None`.
pub type Tuple = [Option<Entity>; 2];

/// Set semantics: tuples are deduplicated and sorted per predicate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactBase {
    tuples: [Vec<Tuple>; 9],
}

impl FactBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a ground literal; argument count must match the predicate.
    pub fn insert(&mut self, pred: Pred, args: &[Entity]) {
        assert_eq!(
            args.len(),
            pred.arg_types().len(),
            "wrong argument count for {pred}"
        );
        let tuple = [args.first().copied(), args.get(1).copied()];
        let bucket = &mut self.tuples[pred.index()];
        if let Err(pos) = bucket.binary_search(&tuple) {
            bucket.insert(pos, tuple);
        }
    }

    pub fn tuples(&self, pred: Pred) -> &[Tuple] {
        &self.tuples[pred.index()]
    }

    pub fn len(&self) -> usize {
        self.tuples.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, pred: Pred, args: &[Entity]) -> bool {
        let tuple = [args.first().copied(), args.get(1).copied()];
        self.tuples[pred.index()].binary_search(&tuple).is_ok()
    }

    /// All entities mentioned anywhere, sorted and deduplicated.
    pub fn entities(&self) -> Vec<Entity> {
        let mut out: Vec<Entity> = self
            .tuples
            .iter()
            .flatten()
            .flat_map(|t| t.iter().flatten().copied())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Iterates `(pred, args)` over every ground literal.
    pub fn iter(&self) -> impl Iterator<Item = (Pred, Vec<Entity>)> + '_ {
        Pred::ALL.iter().flat_map(move |&p| {
            self.tuples(p)
                .iter()
                .map(move |t| (p, t.iter().flatten().copied().collect()))
        })
    }
}
