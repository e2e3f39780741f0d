//! Quadratic discriminant with a diagonal covariance per class, shrunk
//! toward its mean variance. A full covariance is singular with ten
//! thousand features and a few dozen samples.

use serde::{Deserialize, Serialize};

use super::gnb::DiagonalGaussians;
use super::Features;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QdaParams {
    pub shrinkage: f64,
}

impl Default for QdaParams {
    fn default() -> Self {
        QdaParams { shrinkage: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QdaModel {
    pub gaussians: DiagonalGaussians,
}

/// Floor on regularized variances so constant pixels stay finite.
const MIN_VARIANCE: f64 = 1e-12;

impl QdaModel {
    pub fn fit(x: &Features, y: &[u8], p: &QdaParams) -> Self {
        let (counts, means, mut variances) = DiagonalGaussians::class_moments(x, y, 1);
        for vars in variances.iter_mut() {
            let mean = vars.iter().sum::<f64>() / vars.len().max(1) as f64;
            for v in vars.iter_mut() {
                *v = ((1.0 - p.shrinkage) * *v + p.shrinkage * mean).max(MIN_VARIANCE);
            }
        }
        let total = (counts[0] + counts[1]) as f64;
        let log_prior = [(counts[0] as f64 / total).ln(), (counts[1] as f64 / total).ln()];
        QdaModel { gaussians: DiagonalGaussians { log_prior, means, variances } }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        self.gaussians.probability(x)
    }
}
