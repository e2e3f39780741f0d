use serde::{Deserialize, Serialize};

use super::{sigmoid, Features};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GnbParams {
    /// Added to every variance, as a fraction of the largest feature variance.
    pub var_smoothing: f64,
}

impl Default for GnbParams {
    fn default() -> Self {
        GnbParams { var_smoothing: 1e-9 }
    }
}

/// Per-class diagonal Gaussian model, shared by naive Bayes and the
/// shrunk diagonal QDA.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGaussians {
    pub log_prior: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl DiagonalGaussians {
    pub(crate) fn class_moments(x: &Features, y: &[u8], ddof: usize) -> ([usize; 2], [Vec<f64>; 2], [Vec<f64>; 2]) {
        let d = x.d();
        let mut counts = [0usize; 2];
        let mut means = [vec![0.0; d], vec![0.0; d]];
        for (row, &l) in x.rows().zip(y) {
            counts[l as usize] += 1;
            for (m, v) in means[l as usize].iter_mut().zip(row) {
                *m += v;
            }
        }
        for c in 0..2 {
            let n = counts[c] as f64;
            means[c].iter_mut().for_each(|m| *m /= n);
        }
        let mut vars = [vec![0.0; d], vec![0.0; d]];
        for (row, &l) in x.rows().zip(y) {
            let c = l as usize;
            for ((s, v), m) in vars[c].iter_mut().zip(row).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for c in 0..2 {
            let denom = counts[c].saturating_sub(ddof).max(1) as f64;
            vars[c].iter_mut().for_each(|s| *s /= denom);
        }
        (counts, means, vars)
    }

    fn log_joint(&self, x: &[f64], c: usize) -> f64 {
        let mut acc = self.log_prior[c];
        for ((v, m), s) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
            acc -= 0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m) * (v - m) / s);
        }
        acc
    }

    /// Posterior probability of class 1.
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.log_joint(x, 1) - self.log_joint(x, 0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub gaussians: DiagonalGaussians,
}

impl GnbModel {
    pub fn fit(x: &Features, y: &[u8], p: &GnbParams) -> Self {
        let (counts, means, mut variances) = DiagonalGaussians::class_moments(x, y, 0);
        // Largest per-feature variance over the whole training set.
        let n = x.n() as f64;
        let mut max_var: f64 = 0.0;
        for j in 0..x.d() {
            let mean = (0..x.n()).map(|i| x.get(i, j)).sum::<f64>() / n;
            let var = (0..x.n()).map(|i| (x.get(i, j) - mean).powi(2)).sum::<f64>() / n;
            max_var = max_var.max(var);
        }
        let eps = (p.var_smoothing * max_var).max(f64::MIN_POSITIVE);
        for v in variances.iter_mut().flatten() {
            *v += eps;
        }
        let total = (counts[0] + counts[1]) as f64;
        let log_prior = [(counts[0] as f64 / total).ln(), (counts[1] as f64 / total).ln()];
        GnbModel { gaussians: DiagonalGaussians { log_prior, means, variances } }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        self.gaussians.probability(x)
    }
}
