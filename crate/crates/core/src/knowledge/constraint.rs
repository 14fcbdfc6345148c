//! Functional-constraint rules and their text format.

use std::fmt;

use thiserror::Error;

use crate::logic::clause::parse_literals;
use crate::logic::{count_groundings, Clause, ClauseError, Literal, Var};
use crate::sim::{ActionKind, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Soft,
    Hard,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Soft => "soft",
            Mode::Hard => "hard",
        }
    }
}

/// `action(vars) :- body, omega=w, alpha=a, mode=m`.
///
/// The body is a conjunction over the current observation; it holds when
/// each of its variable-connected components has at least one grounding.
/// Head variables are kept for display and are not bound to the action's
/// target.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalConstraint {
    pub action: ActionKind,
    pub head_vars: Vec<String>,
    pub body: Vec<Literal>,
    pub omega: f64,
    pub alpha: f64,
    pub mode: Mode,
}

impl FunctionalConstraint {
    /// Connected components of the body, each as its own clause.
    pub fn conditions(&self) -> Vec<Clause> {
        let n = self.body.len();
        let mut comp: Vec<usize> = (0..n).collect();
        fn root(c: &mut [usize], mut i: usize) -> usize {
            while c[i] != i {
                c[i] = c[c[i]];
                i = c[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.body[i].args.iter().any(|v| self.body[j].args.contains(v)) {
                    let (a, b) = (root(&mut comp, i), root(&mut comp, j));
                    comp[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: Vec<(usize, Vec<Literal>)> = Vec::new();
        for i in 0..n {
            let r = root(&mut comp, i);
            match groups.iter_mut().find(|(g, _)| *g == r) {
                Some((_, lits)) => lits.push(self.body[i].clone()),
                None => groups.push((r, vec![self.body[i].clone()])),
            }
        }
        groups
            .into_iter()
            .enumerate()
            .map(|(k, (_, lits))| Clause::new(k + 1, renumber(&lits)))
            .collect()
    }

    pub fn applies(&self, obs: &Observation) -> bool {
        self.conditions().iter().all(|c| count_groundings(&obs.facts, c) > 0)
    }

    /// Preference sign: +1 for the action, -1 against, 0 neutral.
    pub fn direction(&self) -> i8 {
        if self.omega > 0.0 {
            1
        } else if self.omega < 0.0 {
            -1
        } else {
            0
        }
    }
}

fn renumber(lits: &[Literal]) -> Vec<Literal> {
    let mut order: Vec<Var> = Vec::new();
    for v in lits.iter().flat_map(|l| l.args.iter()) {
        if !order.contains(v) {
            order.push(*v);
        }
    }
    lits.iter()
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

/// Indices of the constraints in `fcs` that hold on `obs`.
pub fn applicable(fcs: &[FunctionalConstraint], obs: &Observation) -> Vec<usize> {
    fcs.iter()
        .enumerate()
        .filter(|(_, fc)| fc.applies(obs))
        .map(|(i, _)| i)
        .collect()
}

impl fmt::Display for FunctionalConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) :- ", self.action.name().to_lowercase(), self.head_vars.join(","))?;
        if self.body.is_empty() {
            f.write_str("true")?;
        } else {
            write!(f, "{}", Clause::new(0, self.body.clone()))?;
        }
        write!(
            f,
            " , omega={} , alpha={} , mode={}",
            self.omega,
            self.alpha,
            self.mode.name()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("constraint line {line}, near `{token}`: {message}")]
pub struct ConstraintParseError {
    pub line: usize,
    pub token: String,
    pub message: String,
}

fn split_top_level_commas(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

pub fn parse_constraint(text: &str, line: usize) -> Result<FunctionalConstraint, ConstraintParseError> {
    let err = |token: &str, message: String| ConstraintParseError {
        line,
        token: token.trim().to_string(),
        message,
    };
    let (head, rest) = text
        .split_once(":-")
        .ok_or_else(|| err(text, "expected `:-`".into()))?;
    let head = head.trim();
    let open = head.find('(').ok_or_else(|| err(head, "expected `action(vars)`".into()))?;
    if !head.ends_with(')') {
        return Err(err(head, "expected `)` closing the head".into()));
    }
    let name = &head[..open];
    let action = ActionKind::from_name(name.trim()).ok_or_else(|| err(name, "unknown action".into()))?;
    let head_vars: Vec<String> = head[open + 1..head.len() - 1]
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();

    let parts = split_top_level_commas(rest);
    let body_text = parts[0].trim();
    let body = if body_text == "true" {
        Vec::new()
    } else {
        parse_literals(body_text).map_err(|e| err(clause_error_token(&e, body_text), e.to_string()))?
    };
    Clause::new(0, body.clone())
        .var_types()
        .map_err(|e| err(body_text, e.to_string()))?;

    let (mut omega, mut alpha, mut mode) = (None, None, None);
    for part in &parts[1..] {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| err(part, "expected `key=value`".into()))?;
        let value = value.trim();
        match key.trim() {
            "omega" => omega = Some(value.parse::<f64>().map_err(|_| err(value, "omega is not a number".into()))?),
            "alpha" => {
                let a = value.parse::<f64>().map_err(|_| err(value, "alpha is not a number".into()))?;
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(err(value, "alpha must be finite and non-negative".into()));
                }
                alpha = Some(a);
            }
            "mode" => {
                mode = Some(match value {
                    "soft" => Mode::Soft,
                    "hard" => Mode::Hard,
                    _ => return Err(err(value, "mode must be soft or hard".into())),
                })
            }
            other => return Err(err(other, "unknown key".into())),
        }
    }
    let omega = omega.ok_or_else(|| err(text, "missing omega".into()))?;
    if !omega.is_finite() {
        return Err(err(text, "omega must be finite".into()));
    }
    Ok(FunctionalConstraint {
        action,
        head_vars,
        body,
        omega,
        alpha: alpha.ok_or_else(|| err(text, "missing alpha".into()))?,
        mode: mode.ok_or_else(|| err(text, "missing mode".into()))?,
    })
}

fn clause_error_token<'a>(e: &'a ClauseError, fallback: &'a str) -> &'a str {
    match e {
        ClauseError::UnknownPredicate(t) | ClauseError::NotAVariable(t) => t,
        ClauseError::Syntax { token, .. } | ClauseError::StateArgument { token, .. } => token,
        ClauseError::Arity { pred, .. } => pred,
        _ => fallback,
    }
}

/// One constraint per line; blank lines and `#` comments are skipped.
pub fn parse_constraints(text: &str) -> Result<Vec<FunctionalConstraint>, ConstraintParseError> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then(|| parse_constraint(line, i + 1))
        })
        .collect()
}

pub fn write_constraints(fcs: &[FunctionalConstraint]) -> String {
    fcs.iter().map(|fc| format!("{fc}\n")).collect()
}
