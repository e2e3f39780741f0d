use serde::{Deserialize, Serialize};

use super::{squared_distance, Features};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train: Features,
    pub labels: Vec<u8>,
}

impl KnnModel {
    pub fn fit(x: &Features, y: &[u8], p: &KnnParams) -> Self {
        KnnModel { k: p.k, train: x.clone(), labels: y.to_vec() }
    }

    /// Indices of the `k` nearest training rows; equal distances go to the
    /// lower index.
    pub fn neighbours(&self, x: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> =
            self.train.rows().enumerate().map(|(i, r)| (squared_distance(r, x), i)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.iter().take(self.k.min(d.len())).map(|&(_, i)| i).collect()
    }

    /// Fraction of the neighbours that carry label 1.
    pub fn vote_fraction(&self, x: &[f64]) -> f64 {
        let nb = self.neighbours(x);
        let ones = nb.iter().filter(|&&i| self.labels[i] == 1).count();
        ones as f64 / nb.len() as f64
    }
}
