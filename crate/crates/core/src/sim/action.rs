use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{CityConfig, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    LockShop,
    UnlockShop,
    LockRes,
    UnlockRes,
    LockWork,
    UnlockWork,
    LockHome,
    UnlockHome,
    LockRoute,
    UnlockRoute,
    IncreaseTesting,
    NilPolicy,
}

impl ActionKind {
    pub const ALL: [ActionKind; 12] = [
        ActionKind::LockShop,
        ActionKind::UnlockShop,
        ActionKind::LockRes,
        ActionKind::UnlockRes,
        ActionKind::LockWork,
        ActionKind::UnlockWork,
        ActionKind::LockHome,
        ActionKind::UnlockHome,
        ActionKind::LockRoute,
        ActionKind::UnlockRoute,
        ActionKind::IncreaseTesting,
        ActionKind::NilPolicy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::LockShop => "LockShop",
            ActionKind::UnlockShop => "UnlockShop",
            ActionKind::LockRes => "LockRes",
            ActionKind::UnlockRes => "UnlockRes",
            ActionKind::LockWork => "LockWork",
            ActionKind::UnlockWork => "UnlockWork",
            ActionKind::LockHome => "LockHome",
            ActionKind::UnlockHome => "UnlockHome",
            ActionKind::LockRoute => "LockRoute",
            ActionKind::UnlockRoute => "UnlockRoute",
            ActionKind::IncreaseTesting => "IncreaseTesting",
            ActionKind::NilPolicy => "NilPolicy",
        }
    }

    /// Case-insensitive lookup, so the constraint language can write
    /// `lockshop` for `LockShop`.
    pub fn from_name(name: &str) -> Option<ActionKind> {
        ActionKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }

    /// Location type a target must have, if the kind takes one.
    fn target_kind(self) -> Option<&'static str> {
        match self {
            ActionKind::LockShop | ActionKind::UnlockShop => Some("shop"),
            ActionKind::LockRes | ActionKind::UnlockRes => Some("res"),
            ActionKind::LockWork | ActionKind::UnlockWork => Some("work"),
            ActionKind::LockHome | ActionKind::UnlockHome => Some("home"),
            ActionKind::LockRoute | ActionKind::UnlockRoute => Some("route"),
            ActionKind::IncreaseTesting | ActionKind::NilPolicy => None,
        }
    }

    pub fn is_lock(self) -> bool {
        matches!(
            self,
            ActionKind::LockShop
                | ActionKind::LockRes
                | ActionKind::LockWork
                | ActionKind::LockHome
                | ActionKind::LockRoute
        )
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub kind: ActionKind,
    pub target: Option<Location>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("unknown action `{0}`")]
    Unknown(String),
    #[error("{kind} needs a {expected} target")]
    MissingTarget { kind: ActionKind, expected: &'static str },
    #[error("{kind} takes no target, got {target}")]
    UnexpectedTarget { kind: ActionKind, target: Location },
    #[error("{kind} cannot target {target}")]
    WrongTargetType { kind: ActionKind, target: Location },
    #[error("{0} is not a declared location")]
    Undeclared(Location),
    #[error(transparent)]
    Location(#[from] super::config::LocationParseError),
}

impl Action {
    pub const NIL: Action = Action {
        kind: ActionKind::NilPolicy,
        target: None,
    };

    pub fn new(kind: ActionKind, target: Option<Location>) -> Result<Self, ActionError> {
        let action = Action { kind, target };
        action.check_shape()?;
        Ok(action)
    }

    pub fn lock_shop(shop: usize) -> Self {
        Action {
            kind: ActionKind::LockShop,
            target: Some(Location::Shop(shop)),
        }
    }

    pub fn unlock_shop(shop: usize) -> Self {
        Action {
            kind: ActionKind::UnlockShop,
            target: Some(Location::Shop(shop)),
        }
    }

    fn check_shape(&self) -> Result<(), ActionError> {
        match (self.kind.target_kind(), self.target) {
            (None, None) => Ok(()),
            (None, Some(t)) => Err(ActionError::UnexpectedTarget {
                kind: self.kind,
                target: t,
            }),
            (Some(expected), None) => Err(ActionError::MissingTarget {
                kind: self.kind,
                expected,
            }),
            (Some(expected), Some(t)) if t.kind_name() != expected => Err(ActionError::WrongTargetType {
                kind: self.kind,
                target: t,
            }),
            _ => Ok(()),
        }
    }

    pub fn validate(&self, config: &CityConfig) -> Result<(), ActionError> {
        self.check_shape()?;
        match self.target {
            Some(t) if !config.is_declared(t) => Err(ActionError::Undeclared(t)),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.target {
            Some(t) => write!(f, "{}:{}", self.kind, t),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl FromStr for Action {
    type Err = ActionError;

    /// `Kind` or `Kind:target`, e.g. `LockShop:shop0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, target) = match s.split_once(':') {
            Some((k, t)) => (k.trim(), Some(t.trim().parse::<Location>()?)),
            None => (s.trim(), None),
        };
        let kind = ActionKind::from_name(kind).ok_or_else(|| ActionError::Unknown(kind.to_string()))?;
        Action::new(kind, target)
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let a: Action = "LockShop:shop0".parse().unwrap();
        assert_eq!(a, Action::lock_shop(0));
        assert_eq!(a.to_string(), "LockShop:shop0");
        assert_eq!("nilpolicy".parse::<Action>().unwrap(), Action::NIL);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!("LockShop".parse::<Action>(), Err(ActionError::MissingTarget { .. })));
        assert!(matches!(
            "LockShop:work0".parse::<Action>(),
            Err(ActionError::WrongTargetType { .. })
        ));
        assert!(matches!(
            "IncreaseTesting:shop0".parse::<Action>(),
            Err(ActionError::UnexpectedTarget { .. })
        ));
        assert!(matches!("Dance".parse::<Action>(), Err(ActionError::Unknown(_))));
    }

    #[test]
    fn undeclared_target() {
        let cfg = CityConfig::micro(0);
        assert_eq!(
            Action::lock_shop(3).validate(&cfg),
            Err(ActionError::Undeclared(Location::Shop(3)))
        );
        Action::lock_shop(0).validate(&cfg).unwrap();
    }
}
