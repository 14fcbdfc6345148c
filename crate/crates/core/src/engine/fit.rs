//! Ridge-stabilized least squares for linear basis functions.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// `w . x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearBasis<S> {
    pub weights: Vec<S>,
    pub intercept: S,
}

impl<S: Scalar> LinearBasis<S> {
    pub fn zero(dim: usize) -> Self {
        LinearBasis {
            weights: vec![S::zero(); dim],
            intercept: S::zero(),
        }
    }

    pub fn constant(dim: usize, c: S) -> Self {
        LinearBasis {
            weights: vec![S::zero(); dim],
            intercept: c,
        }
    }

    pub fn eval(&self, x: &[S]) -> S {
        debug_assert_eq!(x.len(), self.weights.len());
        self.weights
            .iter()
            .zip(x)
            .fold(self.intercept, |acc, (&w, &xi)| acc + w * xi)
    }

    pub fn is_zero(&self) -> bool {
        self.intercept == S::zero() && self.weights.iter().all(|w| *w == S::zero())
    }
}

pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Least squares with an unpenalized intercept, solved on centered data so
/// constant targets give an exact intercept and zero weights. The ridge
/// term `ridge * |w|^2` is only added when the centered Gram matrix is
/// numerically rank deficient; full-rank fits stay unbiased.
pub fn fit_linear<S: Scalar>(xs: &[&[S]], ys: &[S], ridge: S) -> LinearBasis<S> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let dim = xs.first().map_or(0, |x| x.len());
    if n == 0 {
        return LinearBasis::zero(dim);
    }
    let nf = S::lit(n as f64);
    let mean_y = ys.iter().copied().sum::<S>() / nf;
    let mut mean_x = vec![S::zero(); dim];
    for x in xs {
        for (m, &v) in mean_x.iter_mut().zip(x.iter()) {
            *m = *m + v;
        }
    }
    mean_x.iter_mut().for_each(|m| *m = *m / nf);

    let mut gram = vec![vec![S::zero(); dim]; dim];
    let mut rhs = vec![S::zero(); dim];
    for (x, &y) in xs.iter().zip(ys) {
        let yc = y - mean_y;
        for i in 0..dim {
            let xi = x[i] - mean_x[i];
            rhs[i] = rhs[i] + xi * yc;
            for j in i..dim {
                gram[i][j] = gram[i][j] + xi * (x[j] - mean_x[j]);
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
    }
    let scale = (0..dim).map(|i| gram[i][i]).fold(S::zero(), S::max);
    let pivot_floor = scale * S::lit(1e-10);
    let weights = match solve_with_floor(gram.clone(), rhs.clone(), pivot_floor) {
        Some(w) if scale > S::zero() => w,
        _ => {
            for (i, row) in gram.iter_mut().enumerate() {
                row[i] = row[i] + ridge;
            }
            solve(gram, rhs).unwrap_or_else(|| vec![S::zero(); dim])
        }
    };
    let intercept = weights
        .iter()
        .zip(&mean_x)
        .fold(mean_y, |acc, (&w, &m)| acc - w * m);
    LinearBasis { weights, intercept }
}

/// Gaussian elimination with partial pivoting. `None` if singular.
pub fn solve<S: Scalar>(a: Vec<Vec<S>>, b: Vec<S>) -> Option<Vec<S>> {
    solve_with_floor(a, b, S::zero())
}

/// As `solve`, but any pivot with magnitude at or below `floor` counts as
/// singular.
pub fn solve_with_floor<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>, floor: S) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() <= floor || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == S::zero() {
                continue;
            }
            for k in col..n {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let s = (row + 1..n).fold(b[row], |acc, k| acc - a[row][k] * x[k]);
        x[row] = s / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn realizable_fit_is_exact() {
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.3, (i * i % 7) as f64]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x[0] - 0.5 * x[1] + 1.25).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let b = fit_linear(&refs, &ys, 1e-6);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((b.eval(x) - y).abs() <= 1e-8);
        }
    }

    #[test]
    fn constant_targets_give_intercept_only() {
        let xs: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let b = fit_linear(&refs, &[0.7; 8], 1e-6);
        assert_abs_diff_eq!(b.intercept, 0.7, epsilon = 1e-12);
        assert!(b.weights.iter().all(|w| w.abs() <= 1e-6));
    }

    #[test]
    fn identical_features_give_intercept_only() {
        let xs = vec![vec![1.0, 2.0]; 5];
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let b = fit_linear(&refs, &[1.0, 2.0, 3.0, 4.0, 5.0], 1e-6);
        assert_eq!(b.weights, vec![0.0, 0.0]);
        assert_abs_diff_eq!(b.intercept, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn duplicated_column_falls_back_to_ridge() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let ys: Vec<f64> = (0..6).map(|i| 2.0 * i as f64).collect();
        let b = fit_linear(&refs, &ys, 1e-6);
        assert_abs_diff_eq!(b.weights[0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b.weights[1], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn solve_small_system() {
        let x = solve(vec![vec![0.0, 2.0], vec![3.0, 1.0]], vec![4.0, 5.0f64]).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 2.0, epsilon = 1e-15);
        assert!(solve(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0f64]).is_none());
    }
}
