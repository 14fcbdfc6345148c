use crate::scalar::Scalar;
use crate::sim::{Action, Observation};

/// One rollout: what was seen, what was done, what came back.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub observations: Vec<Observation>,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

pub const DEFAULT_DISCOUNT: f64 = 0.9;

/// Discounted return-to-go for every step.
pub fn estimate_q<S: Scalar>(rewards: &[f64], discount: f64) -> Vec<S> {
    assert!((0.0..1.0).contains(&discount), "discount must lie in [0, 1)");
    let mut q = vec![S::zero(); rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + discount * acc;
        q[t] = S::lit(acc);
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn return_to_go() {
        let q: Vec<f64> = estimate_q(&[0.0, -1.0, -1.0], 0.9);
        assert!((q[0] - -1.71).abs() < 1e-12);
        assert_eq!(q[2], -1.0);
        let q: Vec<f64> = estimate_q(&[0.0; 4], 0.9);
        assert!(q.iter().all(|&v| v == 0.0));
        let q: Vec<f64> = estimate_q(&[1.0, -2.0, 3.0], 0.0);
        assert_eq!(q, vec![1.0, -2.0, 3.0]);
    }
}
