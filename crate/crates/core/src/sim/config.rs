//! City configuration and location identifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A declared location. Displayed and parsed as `res0`, `home3`, `shop1`,
/// `work0`, `hosp0`, `route2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Location {
    Res(usize),
    Home(usize),
    Shop(usize),
    Work(usize),
    Hospital(usize),
    Route(usize),
}

impl Location {
    pub fn kind_name(self) -> &'static str {
        match self {
            Location::Res(_) => "res",
            Location::Home(_) => "home",
            Location::Shop(_) => "shop",
            Location::Work(_) => "work",
            Location::Hospital(_) => "hosp",
            Location::Route(_) => "route",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Location::Res(i)
            | Location::Home(i)
            | Location::Shop(i)
            | Location::Work(i)
            | Location::Hospital(i)
            | Location::Route(i) => i,
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind_name(), self.index())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed location id `{0}`")]
pub struct LocationParseError(pub String);

impl FromStr for Location {
    type Err = LocationParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let split = s
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| LocationParseError(s.to_string()))?;
        let (kind, num) = s.split_at(split);
        let idx: usize = num.parse().map_err(|_| LocationParseError(s.to_string()))?;
        Ok(match kind {
            "res" => Location::Res(idx),
            "home" => Location::Home(idx),
            "shop" => Location::Shop(idx),
            "work" => Location::Work(idx),
            "hosp" => Location::Hospital(idx),
            "route" => Location::Route(idx),
            _ => return Err(LocationParseError(s.to_string())),
        })
    }
}

impl TryFrom<String> for Location {
    type Error = LocationParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Location> for String {
    fn from(l: Location) -> String {
        l.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirParams {
    #[serde(default = "defaults::beta")]
    pub beta_transmission: f64,
    #[serde(default = "defaults::gamma")]
    pub gamma_recovery: f64,
    #[serde(default = "defaults::mortality")]
    pub mortality: f64,
}

impl Default for SirParams {
    fn default() -> Self {
        SirParams {
            beta_transmission: defaults::beta(),
            gamma_recovery: defaults::gamma(),
            mortality: defaults::mortality(),
        }
    }
}

mod defaults {
    pub fn beta() -> f64 {
        0.3
    }
    pub fn gamma() -> f64 {
        0.1
    }
    pub fn mortality() -> f64 {
        0.02
    }
    pub fn seeding() -> f64 {
        0.02
    }
    pub fn hospitalization() -> f64 {
        0.1
    }
    pub fn capacity() -> f64 {
        0.1
    }
    pub fn testing() -> f64 {
        0.1
    }
    pub fn horizon() -> usize {
        50
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityConfig {
    pub n_res: usize,
    pub n_homes_per_res: usize,
    pub n_persons_per_home: usize,
    pub n_shops: usize,
    pub n_workplaces: usize,
    pub n_hospitals: usize,
    /// Pairs of residential areas, shops or workplaces on the same route.
    /// Route `i` is the `i`-th pair.
    #[serde(default)]
    pub route_map: Vec<(Location, Location)>,
    #[serde(default)]
    pub sir: SirParams,
    #[serde(default = "defaults::testing")]
    pub base_testing_rate: f64,
    #[serde(default = "defaults::seeding")]
    pub initial_infected_fraction: f64,
    /// Per-step probability that an infected person is hospitalized.
    #[serde(default = "defaults::hospitalization")]
    pub hospitalization_rate: f64,
    /// Hospital beds as a fraction of the population.
    #[serde(default = "defaults::capacity")]
    pub hospital_capacity_fraction: f64,
    #[serde(default = "defaults::horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid city config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError {
            field,
            message: message.into(),
        }
    }
}

impl CityConfig {
    /// One residential area with two homes of two persons, one shop, one
    /// workplace and one hospital; the area is on a route with the shop and
    /// with the workplace.
    pub fn micro(seed: u64) -> Self {
        CityConfig {
            n_res: 1,
            n_homes_per_res: 2,
            n_persons_per_home: 2,
            n_shops: 1,
            n_workplaces: 1,
            n_hospitals: 1,
            route_map: vec![
                (Location::Res(0), Location::Shop(0)),
                (Location::Res(0), Location::Work(0)),
            ],
            sir: SirParams::default(),
            base_testing_rate: defaults::testing(),
            initial_infected_fraction: defaults::seeding(),
            hospitalization_rate: defaults::hospitalization(),
            hospital_capacity_fraction: defaults::capacity(),
            horizon: defaults::horizon(),
            seed,
        }
    }

    pub fn n_homes(&self) -> usize {
        self.n_res * self.n_homes_per_res
    }

    pub fn population(&self) -> usize {
        self.n_homes() * self.n_persons_per_home
    }

    pub fn hospital_capacity(&self) -> usize {
        ((self.hospital_capacity_fraction * self.population() as f64).round() as usize).max(1)
    }

    pub fn initial_infected(&self) -> usize {
        ((self.initial_infected_fraction * self.population() as f64).round() as usize).max(1)
    }

    pub fn is_declared(&self, loc: Location) -> bool {
        let i = loc.index();
        match loc {
            Location::Res(_) => i < self.n_res,
            Location::Home(_) => i < self.n_homes(),
            Location::Shop(_) => i < self.n_shops,
            Location::Work(_) => i < self.n_workplaces,
            Location::Hospital(_) => i < self.n_hospitals,
            Location::Route(_) => i < self.route_map.len(),
        }
    }

    /// Shop used by residents of `res`: the first shop on a route with it,
    /// otherwise `shop(res mod n_shops)`.
    pub fn shop_of_res(&self, res: usize) -> usize {
        self.route_map
            .iter()
            .find_map(|&(a, b)| match (a, b) {
                (Location::Res(r), Location::Shop(s)) | (Location::Shop(s), Location::Res(r)) if r == res => Some(s),
                _ => None,
            })
            .unwrap_or(res % self.n_shops)
    }

    /// Route index connecting two places, in either orientation.
    pub fn route_between(&self, a: Location, b: Location) -> Option<usize> {
        self.route_map
            .iter()
            .position(|&(x, y)| (x == a && y == b) || (x == b && y == a))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let counts = [
            ("n_res", self.n_res),
            ("n_homes_per_res", self.n_homes_per_res),
            ("n_persons_per_home", self.n_persons_per_home),
            ("n_shops", self.n_shops),
            ("n_workplaces", self.n_workplaces),
            ("n_hospitals", self.n_hospitals),
            ("horizon", self.horizon),
        ];
        for (field, v) in counts {
            if v == 0 {
                return Err(ConfigError::new(field, "must be at least 1"));
            }
        }
        let probs = [
            ("sir.beta_transmission", self.sir.beta_transmission),
            ("sir.gamma_recovery", self.sir.gamma_recovery),
            ("sir.mortality", self.sir.mortality),
            ("base_testing_rate", self.base_testing_rate),
            ("initial_infected_fraction", self.initial_infected_fraction),
            ("hospitalization_rate", self.hospitalization_rate),
            ("hospital_capacity_fraction", self.hospital_capacity_fraction),
        ];
        for (field, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::new(field, format!("{p} is not in [0, 1]")));
            }
        }
        for &(a, b) in &self.route_map {
            for loc in [a, b] {
                if !matches!(loc, Location::Res(_) | Location::Shop(_) | Location::Work(_)) {
                    return Err(ConfigError::new(
                        "route_map",
                        format!("{loc} is not a residential area, shop or workplace"),
                    ));
                }
                if !self.is_declared(loc) {
                    return Err(ConfigError::new("route_map", format!("{loc} is not declared")));
                }
            }
            if a == b {
                return Err(ConfigError::new("route_map", format!("self-loop at {a}")));
            }
        }
        Ok(())
    }
}
