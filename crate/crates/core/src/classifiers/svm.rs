//! Soft-margin SVM with an RBF kernel, trained by SMO with second-order
//! working-set selection.

use serde::{Deserialize, Serialize};

use super::{squared_distance, Features, TrainingInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub gamma: f64,
    pub c: f64,
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { gamma: 0.001, c: 1.0, tol: 1e-3, max_steps: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub dual_coef: Vec<f64>,
    pub rho: f64,
}

impl SvmModel {
    /// Signed margin `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coef)
            .map(|(sv, c)| c * (-self.gamma * squared_distance(sv, x)).exp())
            .sum::<f64>()
            - self.rho
    }
}

/// Converged dual state, exposed for optimality checks.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub y: Vec<f64>,
    pub rho: f64,
    pub steps: usize,
    pub converged: bool,
    /// Final maximal violating-pair gap.
    pub gap: f64,
}

const TAU: f64 = 1e-12;

pub fn rbf_gram(x: &Features, gamma: f64) -> Vec<f64> {
    let n = x.n();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = (-gamma * squared_distance(x.row(i), x.row(j))).exp();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

pub fn solve_dual(x: &Features, labels: &[u8], p: &SvmParams) -> DualSolution {
    let n = x.n();
    let k = rbf_gram(x, p.gamma);
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let c = p.c;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt < 0.0 && a < c) || (yt > 0.0 && a > 0.0);

    let mut steps = 0;
    let mut converged = false;
    let mut gap = f64::INFINITY;
    while steps < p.max_steps {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let b = gmax - v;
                let mut a = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < p.tol {
            converged = true;
            break;
        }
        steps += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
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
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
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
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Offset: mean over free vectors, else midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free, mut sum_free) = (0usize, 0.0);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };
    DualSolution { alpha, y, rho, steps, converged, gap }
}

/// Largest violation of the KKT conditions of the trained dual, measured on
/// `y_i f(x_i)` against the unit margin.
pub fn kkt_violation(x: &Features, sol: &DualSolution, p: &SvmParams) -> f64 {
    let n = x.n();
    let k = rbf_gram(x, p.gamma);
    let mut worst: f64 = 0.0;
    for t in 0..n {
        let f: f64 = (0..n).map(|s| sol.alpha[s] * sol.y[s] * k[t * n + s]).sum::<f64>() - sol.rho;
        let yf = sol.y[t] * f;
        let v = if sol.alpha[t] <= 0.0 {
            (1.0 - yf).max(0.0)
        } else if sol.alpha[t] >= p.c {
            (yf - 1.0).max(0.0)
        } else {
            (yf - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

pub(crate) fn fit(x: &Features, labels: &[u8], p: &SvmParams) -> (SvmModel, TrainingInfo) {
    let sol = solve_dual(x, labels, p);
    if !sol.converged {
        log::warn!("svm: SMO stopped after {} steps with gap {:.3e}", sol.steps, sol.gap);
    }
    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for t in 0..x.n() {
        if sol.alpha[t] > 0.0 {
            support_vectors.push(x.row(t).to_vec());
            dual_coef.push(sol.alpha[t] * sol.y[t]);
        }
    }
    let objective = {
        let k = rbf_gram(x, p.gamma);
        let n = x.n();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += sol.alpha[i] * sol.alpha[j] * sol.y[i] * sol.y[j] * k[i * n + j];
            }
        }
        0.5 * quad - sol.alpha.iter().sum::<f64>()
    };
    let info = TrainingInfo { iterations: sol.steps, converged: sol.converged, objective };
    (SvmModel { gamma: p.gamma, support_vectors, dual_coef, rho: sol.rho }, info)
}
