use serde::{Deserialize, Serialize};

use super::{squared_distance, Features};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CentroidParams {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    pub centroids: [Vec<f64>; 2],
}

impl CentroidModel {
    pub fn fit(x: &Features, y: &[u8]) -> Self {
        let mut sums = [vec![0.0; x.d()], vec![0.0; x.d()]];
        let mut counts = [0usize; 2];
        for (row, &l) in x.rows().zip(y) {
            counts[l as usize] += 1;
            for (s, v) in sums[l as usize].iter_mut().zip(row) {
                *s += v;
            }
        }
        for c in 0..2 {
            let n = counts[c] as f64;
            sums[c].iter_mut().for_each(|s| *s /= n);
        }
        CentroidModel { centroids: sums }
    }

    /// `d(x, c0) - d(x, c1)`: positive when class 1 is strictly closer.
    pub fn margin(&self, x: &[f64]) -> f64 {
        squared_distance(x, &self.centroids[0]).sqrt() - squared_distance(x, &self.centroids[1]).sqrt()
    }
}
