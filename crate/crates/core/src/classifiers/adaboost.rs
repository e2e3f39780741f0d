//! Discrete two-class AdaBoost (SAMME) over decision stumps.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{midpoint, presort};
use super::{Features, TrainingInfo};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaBoostParams {
    pub rounds: usize,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams { rounds: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// Label assigned when `x[feature] <= threshold`.
    pub left_label: u8,
}

impl Stump {
    pub fn predict(&self, x: &[f64]) -> u8 {
        if x[self.feature] <= self.threshold {
            self.left_label
        } else {
            1 - self.left_label
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
}

impl AdaBoostModel {
    /// Share of the total stump weight voting for class 1.
    pub fn vote_fraction(&self, x: &[f64]) -> f64 {
        self.staged_vote_fraction(x, self.stumps.len())
    }

    /// Vote fraction using only the first `rounds` stumps.
    pub fn staged_vote_fraction(&self, x: &[f64], rounds: usize) -> f64 {
        let mut ones = 0.0;
        let mut total = 0.0;
        for (s, a) in self.stumps.iter().zip(&self.alphas).take(rounds) {
            total += a;
            if s.predict(x) == 1 {
                ones += a;
            }
        }
        ones / total
    }
}

fn best_stump(x: &Features, y: &[u8], w: &[f64], sorted: &[Vec<u32>], order: &[usize]) -> Option<(Stump, f64)> {
    let total: f64 = w.iter().sum();
    let w0: f64 = w.iter().zip(y).filter(|(_, &l)| l == 0).map(|(v, _)| v).sum();
    let mut best: Option<(Stump, f64)> = None;
    for &f in order {
        let idx = &sorted[f];
        let (mut l0, mut l1) = (0.0, 0.0);
        for k in 0..idx.len() {
            let i = idx[k] as usize;
            if y[i] == 1 {
                l1 += w[i];
            } else {
                l0 += w[i];
            }
            let Some(&next) = idx.get(k + 1) else { break };
            let (v, vn) = (x.get(i, f), x.get(next as usize, f));
            if vn <= v {
                continue;
            }
            // Left predicts 0: mistakes are class 1 on the left and class 0 on the right.
            let err_left0 = l1 + (w0 - l0);
            for (left_label, err) in [(0u8, err_left0), (1u8, total - err_left0)] {
                let err = err / total;
                if best.as_ref().is_none_or(|(_, e)| err < *e) {
                    best = Some((Stump { feature: f, threshold: midpoint(v, vn), left_label }, err));
                }
            }
        }
    }
    best
}

pub(crate) fn fit(x: &Features, y: &[u8], p: &AdaBoostParams, seed: u64) -> Result<(AdaBoostModel, TrainingInfo)> {
    let n = x.n();
    let sorted = presort(x);
    let mut order: Vec<usize> = (0..x.d()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut w = vec![1.0 / n as f64; n];
    let mut model = AdaBoostModel { stumps: Vec::new(), alphas: Vec::new() };
    let mut converged = false;
    let mut last_err = 0.0;
    for round in 0..p.rounds {
        let Some((stump, err)) = best_stump(x, y, &w, &sorted, &order) else {
            return Err(Error::Training("adaboost: every feature is constant".into()));
        };
        last_err = err;
        if err <= 0.0 {
            model.stumps.push(stump);
            model.alphas.push(1.0);
            converged = true;
            break;
        }
        if err >= 0.5 {
            if round == 0 {
                return Err(Error::Training("adaboost: first stump is no better than chance".into()));
            }
            converged = true;
            break;
        }
        let alpha = ((1.0 - err) / err).ln();
        for i in 0..n {
            if stump.predict(x.row(i)) != y[i] {
                w[i] *= alpha.exp();
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        model.stumps.push(stump);
        model.alphas.push(alpha);
    }
    let info = TrainingInfo { iterations: model.stumps.len(), converged, objective: last_err };
    Ok((model, info))
}
