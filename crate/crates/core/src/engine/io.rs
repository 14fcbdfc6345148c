//! Line-oriented text format for trained models.
//!
//! ```text
//! kipg-model 1
//! features 2
//! activation linear
//! stages 1
//! label 1 sopen(State,Shop)
//! head LockShop:shop0 0
//! unit <step> <output> <intercept> <w1> <w2>
//! ```
//!
//! Floats use the shortest representation that parses back to the same
//! bits, so a write/read cycle is exact.

use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::sim::Action;

use super::fit::LinearBasis;
use super::policy::{Activation, ActionHead, HiddenUnit, PolicyModel};

const MAGIC: &str = "kipg-model 1";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("model line {line}: {message}")]
pub struct ModelParseError {
    pub line: usize,
    pub message: String,
}

pub fn write_model<S: Scalar>(model: &PolicyModel<S>) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "features {}", model.n_features).unwrap();
    match model.activation {
        Activation::Linear => writeln!(out, "activation linear").unwrap(),
        Activation::Softplus { beta } => writeln!(out, "activation softplus {beta}").unwrap(),
    }
    writeln!(out, "stages {}", model.stages).unwrap();
    for (id, text) in &model.feature_labels {
        writeln!(out, "label {id} {text}").unwrap();
    }
    for head in &model.heads {
        writeln!(out, "head {} {}", head.action, head.psi0).unwrap();
        for u in &head.units {
            write!(out, "unit {} {} {}", u.step, u.output, u.basis.intercept).unwrap();
            for w in &u.basis.weights {
                write!(out, " {w}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ModelParseError> {
    let tok = tok.ok_or_else(|| ModelParseError {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| ModelParseError {
        line,
        message: format!("bad {what} `{tok}`"),
    })
}

pub fn read_model<S: Scalar>(text: &str) -> Result<PolicyModel<S>, ModelParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((line, other)) => {
            return Err(ModelParseError {
                line,
                message: format!("expected `{MAGIC}`, found `{other}`"),
            })
        }
        None => {
            return Err(ModelParseError {
                line: 0,
                message: "empty model file".into(),
            })
        }
    }
    let mut n_features = None;
    let mut model = PolicyModel::<S>::new(&[], 0);
    for (line, l) in lines {
        let err = |message: String| ModelParseError { line, message };
        let (key, rest) = l.split_once(' ').unwrap_or((l, ""));
        let mut toks = rest.split_whitespace();
        match key {
            "features" => n_features = Some(num::<usize>(toks.next(), line, "feature count")?),
            "activation" => {
                model.activation = match toks.next() {
                    Some("linear") => Activation::Linear,
                    Some("softplus") => Activation::Softplus {
                        beta: num(toks.next(), line, "beta")?,
                    },
                    other => return Err(err(format!("unknown activation {other:?}"))),
                }
            }
            "stages" => model.stages = num(toks.next(), line, "stage count")?,
            "label" => {
                let (id, text) = rest.split_once(' ').ok_or_else(|| err("label needs an id and text".into()))?;
                model.feature_labels.push((num(Some(id), line, "label id")?, text.to_string()));
            }
            "head" => {
                let name = toks.next().ok_or_else(|| err("head needs an action".into()))?;
                let action: Action = name.parse().map_err(|e| err(format!("{e}")))?;
                model.heads.push(ActionHead {
                    action,
                    psi0: num(toks.next(), line, "psi0")?,
                    units: Vec::new(),
                });
            }
            "unit" => {
                let d = n_features.ok_or_else(|| err("unit before `features`".into()))?;
                let step = num(toks.next(), line, "step")?;
                let output = num(toks.next(), line, "output weight")?;
                let intercept = num(toks.next(), line, "intercept")?;
                let weights = toks.map(|t| num(Some(t), line, "weight")).collect::<Result<Vec<S>, _>>()?;
                if weights.len() != d {
                    return Err(err(format!("expected {d} weights, found {}", weights.len())));
                }
                let head = model.heads.last_mut().ok_or_else(|| err("unit before any head".into()))?;
                head.units.push(HiddenUnit {
                    basis: LinearBasis { weights, intercept },
                    step,
                    output,
                });
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    model.n_features = n_features.ok_or(ModelParseError {
        line: 0,
        message: "missing `features` line".into(),
    })?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut m = PolicyModel::<f64>::new(&[Action::lock_shop(0), Action::NIL], 2);
        m.feature_labels = vec![(1, "sopen(State,Shop)".into()), (7, "pin(State,Person,Home) ^ hin(State,Home,Res)".into())];
        m.heads[0].psi0 = -0.0;
        m.heads[1].units.push(HiddenUnit {
            basis: LinearBasis {
                weights: vec![0.1 + 0.2, -1e-300],
                intercept: std::f64::consts::PI,
            },
            step: 0.5 / 3f64.sqrt(),
            output: 1.0,
        });
        m.activation = Activation::Softplus { beta: 1.0 };
        m.stages = 3;
        let text = write_model(&m);
        let back: PolicyModel<f64> = read_model(&text).unwrap();
        assert_eq!(write_model(&back), text);
        let bits = |m: &PolicyModel<f64>| crate::engine::refine::parameters(m).iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&m));
        assert_eq!(back.heads[0].psi0.to_bits(), (-0.0f64).to_bits());
        assert_eq!(back, m);
    }

    #[test]
    fn f32_round_trip() {
        let mut m = PolicyModel::<f32>::new(&[Action::NIL], 1);
        m.heads[0].units.push(HiddenUnit {
            basis: LinearBasis {
                weights: vec![1.0 / 3.0],
                intercept: 0.1,
            },
            step: 0.5,
            output: 1.0,
        });
        assert_eq!(read_model::<f32>(&write_model(&m)).unwrap(), m);
    }

    #[test]
    fn errors_name_the_line() {
        let e = read_model::<f64>("kipg-model 1\nfeatures 2\nhead NilPolicy 0\nunit 1 1 0 0.5\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(read_model::<f64>("nonsense").is_err());
    }
}
