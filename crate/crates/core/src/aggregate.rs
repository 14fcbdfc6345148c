//! History-folded count features.
//!
//! Each clause's raw grounding counts over a trajectory are normalized by
//! their running maximum and folded into
//! `mu_T + sum_{t<T} w_t * K(c_t, c_{T-1})` with the Gaussian kernel
//! `K(x, y) = exp(-(x - y)^2)` and normalized exponential recency weights.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// `exp(-(x - y)^2)`.
pub fn kernel<S: Scalar>(x: S, y: S) -> S {
    let d = x - y;
    (-(d * d)).exp()
}

/// Raw count history of one clause.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClauseHistory {
    counts: Vec<u64>,
    scale: u64,
}

impl ClauseHistory {
    pub fn push(&mut self, count: u64) {
        self.counts.push(count);
        self.scale = self.scale.max(count).max(1);
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Running maximum, never below 1.
    pub fn scale(&self) -> u64 {
        self.scale.max(1)
    }

    fn normalized<S: Scalar>(&self, t: usize) -> S {
        S::lit(self.counts[t] as f64) / S::lit(self.scale() as f64)
    }
}

/// Count histories of every selected clause over one trajectory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountHistory {
    clauses: Vec<ClauseHistory>,
}

impl CountHistory {
    pub fn new(n_clauses: usize) -> Self {
        CountHistory {
            clauses: vec![ClauseHistory::default(); n_clauses],
        }
    }

    /// Appends one time step of raw counts.
    pub fn push(&mut self, counts: &[u64]) {
        assert_eq!(counts.len(), self.clauses.len(), "feature width changed");
        for (h, &c) in self.clauses.iter_mut().zip(counts) {
            h.push(c);
        }
    }

    pub fn len(&self) -> usize {
        self.clauses.first().map_or(0, |h| h.counts.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self) -> usize {
        self.clauses.len()
    }

    pub fn clause(&self, i: usize) -> &ClauseHistory {
        &self.clauses[i]
    }
}

/// How the bias term is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    /// The normalized raw count at `T`.
    #[default]
    Instantaneous,
    /// A fixed bias for every clause.
    Constant(f64),
}

/// Which history point the kernel compares every earlier count against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelAnchor {
    /// `c_{T-1}`.
    #[default]
    Previous,
    /// `c_T`.
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AggregatorConfig {
    pub enabled: bool,
    pub decay: f64,
    pub mu_mode: MuMode,
    pub anchor: KernelAnchor,
}

impl Default for AggregatorConfig {
    fn default() -> Self {
        AggregatorConfig {
            enabled: true,
            decay: 0.9,
            mu_mode: MuMode::Instantaneous,
            anchor: KernelAnchor::Previous,
        }
    }
}

impl AggregatorConfig {
    pub fn disabled() -> Self {
        AggregatorConfig {
            enabled: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregatedFeatures<S> {
    pub values: Vec<S>,
    pub bias: Vec<S>,
}

impl<S: Scalar> AggregatedFeatures<S> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Normalized recency weights `w_t`, `t = 1..T-1` (index 0 is `t = 1`).
pub fn recency_weights<S: Scalar>(t_len: usize, decay: f64) -> Vec<S> {
    if t_len < 2 {
        return Vec::new();
    }
    let rho = S::lit(decay);
    let raw: Vec<S> = (1..t_len).map(|t| rho.powi((t_len - 1 - t) as i32)).collect();
    let total: S = raw.iter().copied().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Folds the whole history of every clause into one value per clause.
///
/// # Panics
/// If the history is empty.
pub fn aggregate<S: Scalar>(history: &CountHistory, cfg: &AggregatorConfig) -> AggregatedFeatures<S> {
    let t_len = history.len();
    assert!(t_len >= 1, "aggregate needs at least one time step");
    // Unnormalized weights, divided once at the end so that a constant
    // history sums to exactly 1.
    let rho = S::lit(cfg.decay);
    let raw: Vec<S> = (1..t_len).map(|t| rho.powi((t_len - 1 - t) as i32)).collect();
    let total: S = raw.iter().copied().sum();
    let mut out = AggregatedFeatures {
        values: Vec::with_capacity(history.width()),
        bias: Vec::with_capacity(history.width()),
    };
    for h in &history.clauses {
        let mu = match cfg.mu_mode {
            MuMode::Instantaneous => h.normalized::<S>(t_len - 1),
            MuMode::Constant(c) => S::lit(c),
        };
        let mut value = mu;
        if cfg.enabled && t_len >= 2 {
            let anchor = match cfg.anchor {
                KernelAnchor::Previous => h.normalized::<S>(t_len - 2),
                KernelAnchor::Current => h.normalized::<S>(t_len - 1),
            };
            let folded: S = raw
                .iter()
                .enumerate()
                .map(|(t, &w)| w * kernel(h.normalized::<S>(t), anchor))
                .sum();
            value = value + folded / total;
        }
        out.values.push(value);
        out.bias.push(mu);
    }
    out
}
