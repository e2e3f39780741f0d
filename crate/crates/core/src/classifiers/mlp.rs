//! One-hidden-layer ReLU network with a logistic output unit, trained
//! full-batch with Adam on cross-entropy plus a small L2 penalty.
//!
//! Arithmetic is single precision: the input layer is 10 000 × hidden
//! and dominates the cost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Features, TrainingInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty on the weights (not the biases).
    pub l2: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 100,
            epochs: 500,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub inputs: usize,
    pub hidden: usize,
    /// Column-major `inputs × hidden`: hidden unit `j` reads
    /// `w1[j * inputs..(j + 1) * inputs]`.
    pub w1: Vec<f32>,
    pub b1: Vec<f32>,
    pub w2: Vec<f32>,
    pub b2: f32,
}

impl MlpModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        let mut out = self.b2 as f64;
        for j in 0..self.hidden {
            let col = &self.w1[j * self.inputs..(j + 1) * self.inputs];
            let z = self.b1[j] as f64 + col.iter().zip(x).map(|(w, v)| *w as f64 * v).sum::<f64>();
            out += self.w2[j] as f64 * z.max(0.0);
        }
        sigmoid(out)
    }
}

struct Adam {
    m: Vec<f32>,
    v: Vec<f32>,
}

impl Adam {
    fn new(len: usize) -> Self {
        Adam { m: vec![0.0; len], v: vec![0.0; len] }
    }

    /// One update with gradient `grad + l2 * params`.
    fn step(&mut self, params: &mut [f32], grad: &[f32], l2: f32, lr_t: f32, p: &MlpParams) {
        let (b1, b2, eps) = (p.beta1 as f32, p.beta2 as f32, p.epsilon as f32);
        let len = params.len();
        let (m, v, grad) = (&mut self.m[..len], &mut self.v[..len], &grad[..len]);
        for i in 0..len {
            let g = grad[i] + l2 * params[i];
            m[i] = b1 * m[i] + (1.0 - b1) * g;
            v[i] = b2 * v[i] + (1.0 - b2) * g * g;
            params[i] -= lr_t * m[i] / (v[i].sqrt() + eps);
        }
    }
}

/// `c = a · b` for row/column strides given as (row, col).
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f32], sa: (usize, usize), b: &[f32], sb: (usize, usize), c: &mut [f32], sc: (usize, usize)) {
    let s = |x: usize| x as isize;
    // SAFETY: every stride/extent pair stays inside the slices, checked below.
    assert!(a.len() >= (m - 1) * sa.0 + (k - 1) * sa.1 + 1);
    assert!(b.len() >= (k - 1) * sb.0 + (n - 1) * sb.1 + 1);
    assert!(c.len() >= (m - 1) * sc.0 + (n - 1) * sc.1 + 1);
    unsafe {
        matrixmultiply::sgemm(
            m, k, n, 1.0,
            a.as_ptr(), s(sa.0), s(sa.1),
            b.as_ptr(), s(sb.0), s(sb.1),
            0.0,
            c.as_mut_ptr(), s(sc.0), s(sc.1),
        );
    }
}

pub(crate) fn fit(x: &Features, labels: &[u8], p: &MlpParams, seed: u64) -> (MlpModel, TrainingInfo) {
    let (n, d, h) = (x.n(), x.d(), p.hidden);
    // Row-major n × d.
    let xm: Vec<f32> = x.data().iter().map(|&v| v as f32).collect();
    let y: Vec<f32> = labels.iter().map(|&l| l as f32).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound1 = (6.0 / (d + h) as f32).sqrt();
    let bound2 = (6.0 / (h + 1) as f32).sqrt();
    // Column-major d × h, as stored in the model.
    let mut w1: Vec<f32> = (0..d * h).map(|_| rng.gen_range(-bound1..bound1)).collect();
    let mut b1: Vec<f32> = (0..h).map(|_| rng.gen_range(-bound1..bound1)).collect();
    let mut w2: Vec<f32> = (0..h).map(|_| rng.gen_range(-bound2..bound2)).collect();
    let mut b2 = [rng.gen_range(-bound2..bound2)];
    let (mut a_w1, mut a_b1, mut a_w2, mut a_b2) = (Adam::new(d * h), Adam::new(h), Adam::new(h), Adam::new(1));
    let l2 = p.l2 as f32 / n as f32;

    // Row-major n × h activations and their gradients.
    let mut z1 = vec![0f32; n * h];
    let mut dz1 = vec![0f32; n * h];
    let mut g_w1 = vec![0f32; d * h];
    let mut dz2 = vec![0f32; n];
    let mut loss = f64::INFINITY;
    let mut previous = f64::INFINITY;
    for epoch in 1..=p.epochs {
        gemm(n, d, h, &xm, (d, 1), &w1, (1, d), &mut z1, (h, 1));
        let mut data_loss = 0.0f64;
        for i in 0..n {
            let row = &mut z1[i * h..(i + 1) * h];
            let mut z2 = b2[0];
            for j in 0..h {
                row[j] += b1[j];
                z2 += row[j].max(0.0) * w2[j];
            }
            let pr = sigmoid(z2 as f64);
            let yi = y[i] as f64;
            data_loss -= yi * pr.max(1e-300).ln() + (1.0 - yi) * (1.0 - pr).max(1e-300).ln();
            dz2[i] = (pr as f32 - y[i]) / n as f32;
        }
        // The objective only feeds the convergence report, so the O(d·h)
        // penalty is evaluated on the last two epochs alone.
        if epoch + 1 >= p.epochs {
            let penalty = 0.5 * l2 as f64 * (w1.iter().map(|v| (*v as f64).powi(2)).sum::<f64>()
                + w2.iter().map(|v| (*v as f64).powi(2)).sum::<f64>());
            previous = loss;
            loss = data_loss / n as f64 + penalty;
        }

        let mut g_w2 = vec![0f32; h];
        let mut g_b1 = vec![0f32; h];
        for i in 0..n {
            let (zr, dr) = (&z1[i * h..(i + 1) * h], &mut dz1[i * h..(i + 1) * h]);
            for j in 0..h {
                g_w2[j] += zr[j].max(0.0) * dz2[i];
                dr[j] = if zr[j] > 0.0 { dz2[i] * w2[j] } else { 0.0 };
                g_b1[j] += dr[j];
            }
        }
        let g_b2 = [dz2.iter().sum::<f32>()];
        gemm(d, n, h, &xm, (1, d), &dz1, (h, 1), &mut g_w1, (1, d));

        let t = epoch as i32;
        let lr_t = (p.learning_rate * (1.0 - p.beta2.powi(t)).sqrt() / (1.0 - p.beta1.powi(t))) as f32;
        a_w1.step(&mut w1, &g_w1, l2, lr_t, p);
        a_b1.step(&mut b1, &g_b1, 0.0, lr_t, p);
        a_w2.step(&mut w2, &g_w2, l2, lr_t, p);
        a_b2.step(&mut b2, &g_b2, 0.0, lr_t, p);
    }
    let info = TrainingInfo {
        iterations: p.epochs,
        converged: (previous - loss).abs() < 1e-4,
        objective: loss,
    };
    let model = MlpModel { inputs: d, hidden: h, w1, b1, w2, b2: b2[0] };
    (model, info)
}
