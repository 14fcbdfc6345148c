//! Predicate schema and mode declarations for the city domain.

use std::collections::BTreeMap;
use std::fmt;

/// Argument types of schema predicates.
///
/// `Place` is the supertype used by `same/3`, whose two location arguments
/// range over residential areas, shops and workplaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityType {
    State,
    Person,
    Home,
    Res,
    Shop,
    Work,
    Route,
    Place,
}

impl EntityType {
    pub fn name(self) -> &'static str {
        match self {
            EntityType::State => "State",
            EntityType::Person => "Person",
            EntityType::Home => "Home",
            EntityType::Res => "Res",
            EntityType::Shop => "Shop",
            EntityType::Work => "Work",
            EntityType::Route => "Route",
            EntityType::Place => "Loc",
        }
    }

    fn is_place(self) -> bool {
        matches!(self, EntityType::Res | EntityType::Shop | EntityType::Work)
    }

    /// Most specific common type, if the two are compatible.
    pub fn unify(self, other: EntityType) -> Option<EntityType> {
        match (self, other) {
            (a, b) if a == b => Some(a),
            (EntityType::Place, b) if b.is_place() => Some(b),
            (a, EntityType::Place) if a.is_place() => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The nine predicates observable in the city. Every predicate's first
/// argument is the `State`; it is implicit in [`Pred::arg_types`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pred {
    Hin,
    Hopen,
    Hospitalized,
    Pin,
    Quarantined,
    Ropen,
    Same,
    Sopen,
    Wopen,
}

impl Pred {
    /// All predicates, sorted by name.
    pub const ALL: [Pred; 9] = [
        Pred::Hin,
        Pred::Hopen,
        Pred::Hospitalized,
        Pred::Pin,
        Pred::Quarantined,
        Pred::Ropen,
        Pred::Same,
        Pred::Sopen,
        Pred::Wopen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pred::Same => "same",
            Pred::Pin => "pin",
            Pred::Hin => "hin",
            Pred::Sopen => "sopen",
            Pred::Ropen => "ropen",
            Pred::Wopen => "wopen",
            Pred::Hopen => "hopen",
            Pred::Hospitalized => "hospitalized",
            Pred::Quarantined => "quarantined",
        }
    }

    pub fn from_name(name: &str) -> Option<Pred> {
        Pred::ALL.iter().copied().find(|p| p.name() == name)
    }

    /// Types of the non-State arguments.
    pub fn arg_types(self) -> &'static [EntityType] {
        use EntityType::*;
        match self {
            Pred::Same => &[Place, Place],
            Pred::Pin => &[Person, Home],
            Pred::Hin => &[Home, Res],
            Pred::Sopen => &[Shop],
            Pred::Ropen => &[Res],
            Pred::Wopen => &[Work],
            Pred::Hopen => &[Home],
            Pred::Hospitalized => &[Person],
            Pred::Quarantined => &[Person],
        }
    }

    /// Arity including the leading State argument.
    pub fn arity(self) -> usize {
        self.arg_types().len() + 1
    }

    pub fn index(self) -> usize {
        Pred::ALL.iter().position(|&p| p == self).unwrap()
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name(), self.arity())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub pred: Pred,
    pub name: &'static str,
    pub arity: usize,
    /// Full argument type list, State first.
    pub arg_types: Vec<EntityType>,
}

impl From<Pred> for PredicateDecl {
    fn from(pred: Pred) -> Self {
        let mut arg_types = vec![EntityType::State];
        arg_types.extend_from_slice(pred.arg_types());
        PredicateDecl {
            pred,
            name: pred.name(),
            arity: pred.arity(),
            arg_types,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub predicates: Vec<PredicateDecl>,
}

impl Schema {
    pub fn full() -> Self {
        Self::only(&Pred::ALL)
    }

    /// A schema restricted to the given predicates (duplicates collapse).
    pub fn only(preds: &[Pred]) -> Self {
        let mut preds = preds.to_vec();
        preds.sort();
        preds.dedup();
        Schema {
            predicates: preds.into_iter().map(PredicateDecl::from).collect(),
        }
    }

    pub fn contains(&self, pred: Pred) -> bool {
        self.predicates.iter().any(|d| d.pred == pred)
    }
}

/// Aleph-style argument role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgMode {
    /// `+`: must reuse a variable already in the clause.
    Input,
    /// `-`: may introduce a fresh variable or reuse one.
    Output,
}

/// Per predicate, one mode per non-State argument. State is always input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeDeclaration {
    modes: BTreeMap<Pred, Vec<ArgMode>>,
}

impl ModeDeclaration {
    /// Every non-State argument is an output.
    pub fn permissive() -> Self {
        let modes = Pred::ALL
            .iter()
            .map(|&p| (p, vec![ArgMode::Output; p.arg_types().len()]))
            .collect();
        ModeDeclaration { modes }
    }

    pub fn with(mut self, pred: Pred, modes: Vec<ArgMode>) -> Self {
        assert_eq!(modes.len(), pred.arg_types().len(), "mode arity for {pred}");
        self.modes.insert(pred, modes);
        self
    }

    pub fn modes(&self, pred: Pred) -> &[ArgMode] {
        self.modes.get(&pred).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl Default for ModeDeclaration {
    fn default() -> Self {
        Self::permissive()
    }
}
