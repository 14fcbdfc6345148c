//! Mutual-information feature selection.

use std::collections::BTreeMap;

use super::clause::Clause;
use super::facts::FactBase;
use super::ground::count_groundings;

/// Plug-in mutual information (nats) between two discrete label sequences.
pub fn mutual_information<X: Ord + Copy, Y: Ord + Copy>(xs: &[X], ys: &[Y]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    if xs.is_empty() {
        return 0.0;
    }
    let mut joint: BTreeMap<(X, Y), f64> = BTreeMap::new();
    let mut px: BTreeMap<X, f64> = BTreeMap::new();
    let mut py: BTreeMap<Y, f64> = BTreeMap::new();
    for (&x, &y) in xs.iter().zip(ys) {
        *joint.entry((x, y)).or_default() += 1.0;
        *px.entry(x).or_default() += 1.0;
        *py.entry(y).or_default() += 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let pxy = c / n;
            pxy * (pxy / ((px[&x] / n) * (py[&y] / n))).ln()
        })
        .sum();
    mi.max(0.0)
}

/// MI between `count > 0` of `clause` and the action label.
pub fn clause_information<L: Ord + Copy>(clause: &Clause, data: &[(&FactBase, L)]) -> f64 {
    let xs: Vec<bool> = data.iter().map(|(f, _)| count_groundings(f, clause) > 0).collect();
    let ys: Vec<L> = data.iter().map(|&(_, l)| l).collect();
    mutual_information(&xs, &ys)
}

/// Keeps clauses whose MI exceeds `mi_threshold`, best first, at most
/// `budget` of them. Ties go to the lower clause id.
pub fn select_features<L: Ord + Copy>(
    clauses: &[Clause],
    labeled: &[(&FactBase, L)],
    mi_threshold: f64,
    budget: usize,
) -> Vec<Clause> {
    let mut scored: Vec<(f64, &Clause)> = clauses
        .iter()
        .map(|c| (clause_information(c, labeled), c))
        .filter(|(mi, _)| *mi > mi_threshold)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.id.cmp(&b.1.id)));
    scored.into_iter().take(budget).map(|(_, c)| c.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_feature_has_zero_information() {
        let xs = [true; 6];
        let ys = [0, 1, 0, 1, 1, 0];
        assert_eq!(mutual_information(&xs, &ys), 0.0);
    }

    #[test]
    fn perfect_predictor_recovers_label_entropy() {
        let xs = [true, true, false, false, false, false];
        let ys = [1, 1, 0, 0, 0, 0];
        let h = -(1.0 / 3.0f64 * (1.0 / 3.0f64).ln() + 2.0 / 3.0 * (2.0 / 3.0f64).ln());
        assert!((mutual_information(&xs, &ys) - h).abs() < 1e-12);
    }

    #[test]
    fn contingency_table_oracle() {
        // x\y  a b
        // 0    3 1
        // 1    1 3
        let xs = [0, 0, 0, 0, 1, 1, 1, 1];
        let ys = ['a', 'a', 'a', 'b', 'a', 'b', 'b', 'b'];
        // Direct formula over the four cells, marginals all 1/2.
        let cell = |p: f64| p * (p / 0.25).ln();
        let expected = 2.0 * cell(3.0 / 8.0) + 2.0 * cell(1.0 / 8.0);
        assert!((mutual_information(&xs, &ys) - expected).abs() < 1e-12);
        assert!((expected - 0.130812035941137).abs() < 1e-12);
    }
}
