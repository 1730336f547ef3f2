//! Binary soft-margin SVM trained on its dual by sequential minimal
//! optimisation with second-order working-set selection.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    /// `exp(-|a - b|^2 / (2 l^2))`.
    Rbf {
        length_scale: f64,
    },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(p, q)| p * q).sum(),
            Kernel::Rbf { length_scale } => {
                let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                (-d2 / (2.0 * length_scale * length_scale)).exp()
            }
        }
    }
}

/// Stop once the maximal KKT violation drops below this.
pub const KKT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseSvm {
    points: Vec<Vec<f64>>,
    labels: Vec<f64>,
    alphas: Vec<f64>,
    bias: f64,
    penalty: f64,
    kernel: Kernel,
    kkt_residual: f64,
    iterations: usize,
}

impl PairwiseSvm {
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// Largest violation of the dual optimality conditions at exit.
    pub fn kkt_residual(&self) -> f64 {
        self.kkt_residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Indices of training points with a non-zero dual coefficient.
    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.alphas.len())
            .filter(|&i| self.alphas[i] > 0.0)
            .collect()
    }

    /// `sum_sv alpha y k(x_sv, x) + b`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(&self.labels)
            .zip(&self.alphas)
            .filter(|(_, &a)| a > 0.0)
            .map(|((p, &y), &a)| a * y * self.kernel.eval(p, x))
            .sum::<f64>()
            + self.bias
    }

    /// Hinge slack `max(0, 1 - y f(x))` of each training point.
    pub fn slacks(&self) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.labels)
            .map(|(p, &y)| (1.0 - y * self.decision(p)).max(0.0))
            .collect()
    }

    /// Primal weight vector; only defined for the linear kernel.
    pub fn linear_weights(&self) -> Option<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return None;
        }
        let dim = self.points.first().map_or(0, Vec::len);
        let mut w = vec![0.0; dim];
        for ((p, &y), &a) in self.points.iter().zip(&self.labels).zip(&self.alphas) {
            for (wi, pi) in w.iter_mut().zip(p) {
                *wi += a * y * pi;
            }
        }
        Some(w)
    }

    /// Primal objective `|w|^2 / 2 + C sum slack`.
    pub fn primal_objective(&self) -> f64 {
        let n = self.points.len();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += self.alphas[i]
                    * self.alphas[j]
                    * self.labels[i]
                    * self.labels[j]
                    * self.kernel.eval(&self.points[i], &self.points[j]);
            }
        }
        0.5 * quad + self.penalty * self.slacks().iter().sum::<f64>()
    }
}

/// Train a soft-margin SVM on points labelled `+1` / `-1`.
pub fn train_pairwise(
    points: &[Vec<f64>],
    labels: &[f64],
    penalty: f64,
    kernel: Kernel,
) -> Result<PairwiseSvm> {
    train_pairwise_to(points, labels, penalty, kernel, KKT_TOLERANCE)
}

/// [`train_pairwise`] with an explicit KKT stopping tolerance.
pub fn train_pairwise_to(
    points: &[Vec<f64>],
    labels: &[f64],
    penalty: f64,
    kernel: Kernel,
    tolerance: f64,
) -> Result<PairwiseSvm> {
    let n = points.len();
    if labels.len() != n {
        return Err(Error::domain("one label per training point is required"));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::domain("labels must be +1 or -1"));
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(Error::domain(
            "both classes need at least one training point",
        ));
    }
    if !(penalty > 0.0) {
        return Err(Error::domain("slack penalty must be positive"));
    }
    if !(tolerance > 0.0) {
        return Err(Error::domain("KKT tolerance must be positive"));
    }
    if let Kernel::Rbf { length_scale } = kernel {
        if !(length_scale > 0.0) || !length_scale.is_finite() {
            return Err(Error::domain(
                "RBF length scale must be positive and finite",
            ));
        }
    }

    let k: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| kernel.eval(&points[i], &points[j]))
        .collect();
    let kk = |i: usize, j: usize| k[i * n + j];
    let q = |i: usize, j: usize| labels[i] * labels[j] * kk(i, j);
    let y = labels;
    let c = penalty;

    let mut alpha = vec![0.0; n];
    // Gradient of the dual objective  alpha'Q alpha / 2 - sum alpha.
    let mut grad = vec![-1.0; n];
    let cap = 100_000usize.max(100 * n);
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let residual = loop {
        let mut g_max = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i = t;
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            g_min = g_min.min(v);
            if i != usize::MAX && v < g_max {
                let b = g_max - v;
                let a = kk(i, i) + kk(t, t) - 2.0 * kk(i, t);
                let gain = -b * b / if a > 0.0 { a } else { 1e-12 };
                if gain <= best {
                    best = gain;
                    j = t;
                }
            }
        }
        let violation = g_max - g_min;
        if i == usize::MAX || j == usize::MAX || violation < tolerance {
            break violation.max(0.0);
        }
        if iterations >= cap {
            return Err(Error::NotConverged {
                iterations,
                residual: violation,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = positive(kk(i, i) + kk(j, j) - 2.0 * kk(i, j));
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = positive(kk(i, i) + kk(j, j) - 2.0 * kk(i, j));
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    };

    // Bias from free vectors, or the middle of the admissible interval.
    let (mut upper, mut lower) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else {
        0.5 * (upper + lower)
    };

    Ok(PairwiseSvm {
        points: points.to_vec(),
        labels: labels.to_vec(),
        alphas: alpha,
        bias: -rho,
        penalty,
        kernel,
        kkt_residual: residual,
        iterations,
    })
}

fn positive(quad: f64) -> f64 {
    if quad > 0.0 {
        quad
    } else {
        1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_hand_solution() {
        let x = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let svm = train_pairwise(&x, &[1.0, -1.0], 10.0, Kernel::Linear).unwrap();
        assert!((svm.alphas()[0] - 0.5).abs() <= 1e-6);
        assert!((svm.alphas()[1] - 0.5).abs() <= 1e-6);
        assert!(svm.bias().abs() <= 1e-6);
        let w = svm.linear_weights().unwrap();
        assert!((w[0] - 1.0).abs() <= 1e-6 && w[1].abs() <= 1e-6);
        let margin = 2.0 / w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((margin - 2.0).abs() <= 1e-6);
        assert_eq!(svm.support_indices(), vec![0, 1]);
        assert!(svm.decision(&[0.0, 5.0]).abs() <= 1e-6);
    }

    #[test]
    fn conflicting_duplicates_need_slack() {
        let x = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![2.0, 0.0]];
        let svm = train_pairwise(&x, &[1.0, -1.0, -1.0], 10.0, Kernel::Linear).unwrap();
        let slack: f64 = svm.slacks().iter().take(2).sum();
        assert!(slack >= 1.0 - 1e-3, "{slack}");
        assert!(svm.primal_objective().is_finite());
    }

    #[test]
    fn rejects_single_class() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(train_pairwise(&x, &[1.0, 1.0], 1.0, Kernel::Linear).is_err());
    }

    #[test]
    fn rbf_separates_ring() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for k in 0..24 {
            let a = k as f64 * std::f64::consts::TAU / 24.0;
            x.push(vec![0.3 * a.cos(), 0.3 * a.sin()]);
            y.push(1.0);
            x.push(vec![1.5 * a.cos(), 1.5 * a.sin()]);
            y.push(-1.0);
        }
        let svm = train_pairwise(&x, &y, 10.0, Kernel::Rbf { length_scale: 0.5 }).unwrap();
        for (p, &l) in x.iter().zip(&y) {
            assert!(l * svm.decision(p) > 0.0);
        }
    }

    fn separable() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
        prop::collection::vec((0.0f64..1.0, -1.0f64..1.0, any::<bool>()), 2..30).prop_map(|raw| {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for (i, (u, v, side)) in raw.into_iter().enumerate() {
                // Alternate classes first so both are present.
                let positive = if i < 2 { i == 0 } else { side };
                let s = if positive { 1.0 } else { -1.0 };
                x.push(vec![s * (0.5 + u), v]);
                y.push(s);
            }
            (x, y)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dual_feasible((x, y) in separable(), c in 0.1f64..100.0) {
            let svm = train_pairwise(&x, &y, c, Kernel::Linear).unwrap();
            prop_assert!(svm.alphas().iter().all(|&a| (0.0..=c).contains(&a)));
            let balance: f64 = svm.alphas().iter().zip(&y).map(|(a, l)| a * l).sum();
            prop_assert!(balance.abs() <= 1e-9 * c.max(1.0));
            prop_assert!(svm.kkt_residual() < KKT_TOLERANCE);
        }

        #[test]
        fn hard_margin_on_separable((x, y) in separable()) {
            let svm = train_pairwise_to(&x, &y, 1e6, Kernel::Linear, 1e-9).unwrap();
            for (p, &l) in x.iter().zip(&y) {
                prop_assert!(l * svm.decision(p) >= 1.0 - 1e-6);
            }
            prop_assert!(svm.slacks().iter().all(|&s| s <= 1e-6));
        }
    }
}
