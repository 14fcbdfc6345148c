//! Existentially quantified conjunctions of schema literals.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::schema::{EntityType, Pred};

/// A clause variable. The shared `State` variable is implicit and never
/// numbered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u8);

/// `pred(State, args..)` with variable arguments only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub pred: Pred,
    pub args: Vec<Var>,
}

impl Literal {
    pub fn new(pred: Pred, args: &[u8]) -> Self {
        assert_eq!(args.len(), pred.arg_types().len(), "arity of {pred}");
        Literal {
            pred,
            args: args.iter().map(|&v| Var(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub id: usize,
    pub literals: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClauseError {
    #[error("variable {var} is used at incompatible argument types {first} and {second}")]
    TypeClash {
        var: String,
        first: EntityType,
        second: EntityType,
    },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{pred}` expects {expected} arguments, found {found}")]
    Arity {
        pred: String,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} near `{token}`")]
    Syntax { expected: &'static str, token: String },
    #[error("first argument of `{pred}` must be the State variable, found `{token}`")]
    StateArgument { pred: String, token: String },
    #[error("argument `{0}` is not a variable")]
    NotAVariable(String),
    #[error("empty clause")]
    Empty,
}

impl Clause {
    pub fn new(id: usize, literals: Vec<Literal>) -> Self {
        Clause { id, literals }
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.literals
            .iter()
            .flat_map(|l| l.args.iter())
            .map(|v| v.0 as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// Most specific type of every variable, by unifying all positions.
    pub fn var_types(&self) -> Result<Vec<EntityType>, ClauseError> {
        let mut types: Vec<Option<EntityType>> = vec![None; self.num_vars()];
        for lit in &self.literals {
            for (v, &ty) in lit.args.iter().zip(lit.pred.arg_types()) {
                let slot = &mut types[v.0 as usize];
                *slot = match *slot {
                    None => Some(ty),
                    Some(prev) => Some(prev.unify(ty).ok_or(ClauseError::TypeClash {
                        var: format!("V{}", v.0),
                        first: prev,
                        second: ty,
                    })?),
                };
            }
        }
        Ok(types
            .into_iter()
            .map(|t| t.unwrap_or(EntityType::Place))
            .collect())
    }

    /// True when the literal graph (edges = shared non-State variables)
    /// is connected.
    pub fn is_connected(&self) -> bool {
        if self.literals.len() <= 1 {
            return true;
        }
        let mut reached = vec![false; self.literals.len()];
        reached[0] = true;
        let mut vars: Vec<Var> = self.literals[0].args.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for (i, lit) in self.literals.iter().enumerate() {
                if !reached[i] && lit.args.iter().any(|v| vars.contains(v)) {
                    reached[i] = true;
                    vars.extend(lit.args.iter().copied());
                    changed = true;
                }
            }
        }
        reached.iter().all(|&r| r)
    }

    /// True when every literal after the first shares a variable with an
    /// earlier one, in the stored order.
    pub fn is_connected_in_order(&self) -> bool {
        let mut seen: Vec<Var> = Vec::new();
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 && !lit.args.iter().any(|v| seen.contains(v)) {
                return false;
            }
            seen.extend(lit.args.iter().copied());
        }
        true
    }

    /// Alpha-normal form: the lexicographically least literal sequence over
    /// all literal orders (connected orders only, when one exists) with
    /// variables renamed by first occurrence. Two clauses are equal up to
    /// renaming and reordering iff their canonical forms are equal.
    pub fn canonical(&self) -> Clause {
        let mut literals = self.literals.clone();
        literals.sort();
        literals.dedup();
        let base = Clause::new(self.id, literals);
        let connected = base.is_connected();
        let mut best: Option<Vec<Literal>> = None;
        for_each_permutation(base.literals.len(), &mut |order| {
            let candidate = Clause::new(0, order.iter().map(|&i| base.literals[i].clone()).collect());
            if connected && !candidate.is_connected_in_order() {
                return;
            }
            let renamed = rename_by_first_use(&candidate.literals);
            if best.as_ref().is_none_or(|b| renamed < *b) {
                best = Some(renamed);
            }
        });
        Clause::new(self.id, best.unwrap_or_default())
    }

    pub fn is_alpha_equivalent(&self, other: &Clause) -> bool {
        self.canonical().literals == other.canonical().literals
    }

    /// Display names per variable (`Res`, `Res2`, ..., `Loc` for `Place`).
    pub fn var_names(&self) -> Vec<String> {
        let types = match self.var_types() {
            Ok(t) => t,
            Err(_) => return (0..self.num_vars()).map(|i| format!("V{i}")).collect(),
        };
        let mut seen: HashMap<EntityType, usize> = HashMap::new();
        let mut names = vec![String::new(); types.len()];
        for v in first_use_order(&self.literals) {
            let ty = types[v.0 as usize];
            let n = seen.entry(ty).or_insert(0);
            *n += 1;
            names[v.0 as usize] = if *n == 1 {
                ty.name().to_string()
            } else {
                format!("{}{}", ty.name(), n)
            };
        }
        names
    }

    /// Parses `pred(State,A,B) ^ pred(State,C) ...`.
    pub fn parse(id: usize, text: &str) -> Result<Clause, ClauseError> {
        let literals = parse_literals(text)?;
        let clause = Clause::new(id, literals);
        clause.var_types()?;
        Ok(clause)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.var_names();
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ^ ")?;
            }
            write!(f, "{}(State", lit.pred.name())?;
            for v in &lit.args {
                write!(f, ",{}", names[v.0 as usize])?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn first_use_order(literals: &[Literal]) -> Vec<Var> {
    let mut order = Vec::new();
    for v in literals.iter().flat_map(|l| l.args.iter()) {
        if !order.contains(v) {
            order.push(*v);
        }
    }
    order
}

fn rename_by_first_use(literals: &[Literal]) -> Vec<Literal> {
    let order = first_use_order(literals);
    literals
        .iter()
        .map(|l| Literal {
            pred: l.pred,
            args: l
                .args
                .iter()
                .map(|v| Var(order.iter().position(|o| o == v).unwrap() as u8))
                .collect(),
        })
        .collect()
}

fn for_each_permutation(n: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(k: usize, perm: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if k == perm.len() {
            f(perm);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            rec(k + 1, perm, f);
            perm.swap(k, i);
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    rec(0, &mut perm, f);
}

/// Alias accepted for `hospitalized`.
const HOSPITALIZED_SHORTHAND: &str = "ph";

/// Parses a `^`-separated conjunction of literals. Variable names are
/// scoped to the text; `State` must lead every literal.
pub fn parse_literals(text: &str) -> Result<Vec<Literal>, ClauseError> {
    let mut names: Vec<String> = Vec::new();
    let mut literals = Vec::new();
    let mut state_name: Option<String> = None;
    for part in split_top_level(text, '^') {
        let part = part.trim();
        if part.is_empty() {
            return Err(ClauseError::Syntax {
                expected: "literal",
                token: text.trim().to_string(),
            });
        }
        let open = part.find('(').ok_or_else(|| ClauseError::Syntax {
            expected: "`(`",
            token: part.to_string(),
        })?;
        if !part.ends_with(')') {
            return Err(ClauseError::Syntax {
                expected: "`)`",
                token: part.to_string(),
            });
        }
        let name = part[..open].trim();
        let pred = if name == HOSPITALIZED_SHORTHAND {
            Pred::Hospitalized
        } else {
            Pred::from_name(name).ok_or_else(|| ClauseError::UnknownPredicate(name.to_string()))?
        };
        let args: Vec<&str> = part[open + 1..part.len() - 1]
            .split(',')
            .map(str::trim)
            .collect();
        if args.len() != pred.arity() {
            return Err(ClauseError::Arity {
                pred: name.to_string(),
                expected: pred.arity(),
                found: args.len(),
            });
        }
        for a in &args {
            if !is_variable(a) {
                return Err(ClauseError::NotAVariable(a.to_string()));
            }
        }
        match &state_name {
            None => state_name = Some(args[0].to_string()),
            Some(s) if s != args[0] => {
                return Err(ClauseError::StateArgument {
                    pred: name.to_string(),
                    token: args[0].to_string(),
                })
            }
            _ => {}
        }
        let mut vars = Vec::with_capacity(args.len() - 1);
        for a in &args[1..] {
            if Some(*a) == state_name.as_deref() {
                return Err(ClauseError::StateArgument {
                    pred: name.to_string(),
                    token: a.to_string(),
                });
            }
            let idx = match names.iter().position(|n| n == a) {
                Some(i) => i,
                None => {
                    names.push(a.to_string());
                    names.len() - 1
                }
            };
            vars.push(Var(idx as u8));
        }
        literals.push(Literal { pred, args: vars });
    }
    if literals.is_empty() {
        return Err(ClauseError::Empty);
    }
    Ok(literals)
}

fn is_variable(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&text[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1_ID1: &str = "same(State,Res,Shop) ^ pin(State,Person,Home) ^ hin(State,Home,Res)";

    #[test]
    fn parses_interaction_clause() {
        let c = Clause::parse(1, TABLE1_ID1).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.num_vars(), 4);
        assert!(c.is_connected());
        assert!(!c.is_connected_in_order());
        assert_eq!(c.literals[0].pred, Pred::Same);
    }

    #[test]
    fn display_round_trips_structure() {
        let c = Clause::parse(1, TABLE1_ID1).unwrap();
        let printed = c.to_string();
        assert_eq!(printed, "same(State,Res,Loc) ^ pin(State,Person,Home) ^ hin(State,Home,Res)");
        assert_eq!(Clause::parse(1, &printed).unwrap(), c);
    }

    #[test]
    fn canonical_ignores_order_and_names() {
        let a = Clause::parse(0, "sopen(State,S) ^ same(State,R,S) ^ ropen(State,R)").unwrap();
        let b = Clause::parse(0, "ropen(State,X) ^ same(State,X,Y) ^ sopen(State,Y)").unwrap();
        assert!(a.is_alpha_equivalent(&b));
        let c = Clause::parse(0, "ropen(State,X) ^ same(State,Y,X) ^ sopen(State,Y)").unwrap();
        assert!(!a.is_alpha_equivalent(&c));
        assert!(a.canonical().is_connected_in_order());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Clause::parse(0, "foo(State,X)"), Err(ClauseError::UnknownPredicate(_))));
        assert!(matches!(Clause::parse(0, "sopen(State)"), Err(ClauseError::Arity { .. })));
        assert!(matches!(Clause::parse(0, "sopen(State,shop0)"), Err(ClauseError::NotAVariable(_))));
        assert!(matches!(
            Clause::parse(0, "sopen(State,X) ^ wopen(State,X)"),
            Err(ClauseError::TypeClash { .. })
        ));
        assert!(matches!(
            Clause::parse(0, "sopen(S1,X) ^ ropen(S2,Y)"),
            Err(ClauseError::StateArgument { .. })
        ));
    }

    #[test]
    fn shorthand_hospitalized() {
        let c = Clause::parse(0, "ph(State,Person)").unwrap();
        assert_eq!(c.literals[0].pred, Pred::Hospitalized);
    }
}
