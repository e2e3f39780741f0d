//! Linear SVM fitted by plain stochastic gradient descent on the hinge loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Features, TrainingInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdParams {
    /// L2 penalty.
    pub alpha: f64,
    pub eta0: f64,
    /// Learning rate is `eta0 / t^power_t`.
    pub power_t: f64,
    pub epochs: usize,
}

impl Default for SgdParams {
    fn default() -> Self {
        SgdParams { alpha: 1e-4, eta0: 0.01, power_t: 0.25, epochs: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgdModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl SgdModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.intercept
    }
}

pub(crate) fn fit(x: &Features, labels: &[u8], p: &SgdParams, seed: u64) -> (SgdModel, TrainingInfo) {
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // w = scale * v keeps the L2 decay O(1) per step.
    let mut v = vec![0.0; x.d()];
    let mut scale = 1.0;
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.n()).collect();
    let mut t = 0u64;
    let mut last_objective = f64::INFINITY;
    let mut objective = f64::INFINITY;
    let mut converged = false;
    for epoch in 0..p.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = p.eta0 / (t as f64).powf(p.power_t);
            let row = x.row(i);
            let margin = y[i] * (scale * dot(&v, row) + b);
            scale *= 1.0 - eta * p.alpha;
            if margin < 1.0 {
                let step = eta * y[i] / scale;
                for (vj, xj) in v.iter_mut().zip(row) {
                    *vj += step * xj;
                }
                b += eta * y[i];
            }
            if scale < 1e-9 {
                v.iter_mut().for_each(|vj| *vj *= scale);
                scale = 1.0;
            }
        }
        // The objective only feeds the convergence report.
        if epoch + 2 < p.epochs {
            continue;
        }
        let norm2 = scale * scale * dot(&v, &v);
        let hinge: f64 = (0..x.n())
            .map(|i| (1.0 - y[i] * (scale * dot(&v, x.row(i)) + b)).max(0.0))
            .sum::<f64>()
            / x.n() as f64;
        objective = hinge + 0.5 * p.alpha * norm2;
        converged = (last_objective - objective).abs() < 1e-6 * objective.max(1e-12);
        last_objective = objective;
    }
    let weights = v.iter().map(|vj| vj * scale).collect();
    let info = TrainingInfo { iterations: p.epochs, converged, objective };
    (SgdModel { weights, intercept: b }, info)
}

/// Eight independent partial sums, so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (u, v) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += u[k] * v[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}
