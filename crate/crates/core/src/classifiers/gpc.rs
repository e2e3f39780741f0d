//! Binary Gaussian-process classifier: logistic likelihood, Laplace
//! approximation, RBF kernel with signal variance. Hyperparameters maximize
//! the approximate log marginal likelihood.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, squared_distance, Features, TrainingInfo};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpcParams {
    /// Optimizer starts; the first is data-driven, the rest seeded random.
    pub restarts: usize,
    pub max_iterations: usize,
    /// Newton stops when the Laplace objective changes by less than this.
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl Default for GpcParams {
    fn default() -> Self {
        GpcParams { restarts: 3, max_iterations: 100, newton_tol: 1e-8, max_newton: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpcModel {
    /// `[ln sigma_f^2, ln length_scale]`.
    pub theta: [f64; 2],
    pub train: Features,
    /// `t - pi(f_hat)` at the posterior mode.
    pub dlp: Vec<f64>,
    pub sqrt_w: Vec<f64>,
    /// Row-major lower Cholesky factor of `I + W^½ K W^½`.
    pub chol: Vec<f64>,
    pub log_marginal: f64,
}

impl GpcModel {
    fn kernel(&self, d2: f64) -> f64 {
        rbf(self.theta, d2)
    }

    /// Latent mean and variance at `x`.
    pub fn latent(&self, x: &[f64]) -> (f64, f64) {
        let n = self.train.n();
        let ks: Vec<f64> = self.train.rows().map(|r| self.kernel(squared_distance(r, x))).collect();
        let mean = ks.iter().zip(&self.dlp).map(|(k, g)| k * g).sum();
        // v = L \ (sqrt_w ⊙ k*)
        let mut v = vec![0.0; n];
        for i in 0..n {
            let mut s = self.sqrt_w[i] * ks[i];
            for j in 0..i {
                s -= self.chol[i * n + j] * v[j];
            }
            v[i] = s / self.chol[i * n + i];
        }
        let var = (self.theta[0].exp() - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
        (mean, var)
    }

    /// Averaged predictive probability (probit approximation of the
    /// logistic-Gaussian integral).
    pub fn probability(&self, x: &[f64]) -> f64 {
        let (mean, var) = self.latent(x);
        let kappa = 1.0 / (1.0 + std::f64::consts::PI * var / 8.0).sqrt();
        sigmoid(kappa * mean)
    }
}

fn rbf(theta: [f64; 2], d2: f64) -> f64 {
    let l2 = (2.0 * theta[1]).exp();
    theta[0].exp() * (-d2 / (2.0 * l2)).exp()
}

pub fn pairwise_sq_dists(x: &Features) -> DMatrix<f64> {
    let n = x.n();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = squared_distance(x.row(i), x.row(j));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

pub fn kernel_matrix(d2: &DMatrix<f64>, theta: [f64; 2]) -> DMatrix<f64> {
    d2.map(|v| rbf(theta, v))
}

/// Laplace approximation at the posterior mode.
#[derive(Clone, Debug)]
pub struct LaplaceState {
    pub f: DVector<f64>,
    pub a: DVector<f64>,
    pub pi: DVector<f64>,
    pub sqrt_w: DVector<f64>,
    pub chol: DMatrix<f64>,
    pub log_marginal: f64,
    pub iterations: usize,
}

fn log_lik(t: &[f64], f: &DVector<f64>) -> f64 {
    // log sigmoid(y f) with y = 2t - 1
    t.iter()
        .zip(f.iter())
        .map(|(&ti, &fi)| {
            let z = (2.0 * ti - 1.0) * fi;
            if z >= 0.0 {
                -(-z).exp().ln_1p()
            } else {
                z - z.exp().ln_1p()
            }
        })
        .sum()
}

fn b_factor(k: &DMatrix<f64>, sw: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = k.nrows();
    let mut b = DMatrix::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] += sw[i] * k[(i, j)] * sw[j];
        }
    }
    nalgebra::Cholesky::new(b)
        .map(|c| c.l())
        .ok_or_else(|| Error::Training("gpc: I + W^1/2 K W^1/2 is not positive definite".into()))
}

/// Newton iterations for the mode of `p(f | t)`. `t` holds 0/1 targets.
pub fn laplace_mode(k: &DMatrix<f64>, t: &[f64], tol: f64, max_newton: usize) -> Result<LaplaceState> {
    let n = k.nrows();
    let tv = DVector::from_column_slice(t);
    let mut f = DVector::zeros(n);
    let mut a = DVector::zeros(n);
    let psi = |a: &DVector<f64>, f: &DVector<f64>| -0.5 * a.dot(f) + log_lik(t, f);
    let mut obj = psi(&a, &f);
    let mut iterations = 0;
    for _ in 0..max_newton {
        iterations += 1;
        let pi = f.map(sigmoid);
        let w = pi.map(|p| p * (1.0 - p));
        let sw = w.map(f64::sqrt);
        let l = b_factor(k, &sw)?;
        let b = w.component_mul(&f) + (&tv - &pi);
        let kb = k * &b;
        let c = l.solve_lower_triangular(&sw.component_mul(&kb)).expect("non-singular factor");
        let z = l.transpose().solve_upper_triangular(&c).expect("non-singular factor");
        let mut a_new = &b - sw.component_mul(&z);
        let mut f_new = k * &a_new;
        let mut obj_new = psi(&a_new, &f_new);
        // Damp the step if Newton overshoots.
        let mut halvings = 0;
        while obj_new < obj && halvings < 20 {
            a_new = (&a + &a_new) * 0.5;
            f_new = k * &a_new;
            obj_new = psi(&a_new, &f_new);
            halvings += 1;
        }
        let change = (obj_new - obj).abs();
        a = a_new;
        f = f_new;
        obj = obj_new;
        if change < tol {
            break;
        }
    }
    let pi = f.map(sigmoid);
    let sw = pi.map(|p| (p * (1.0 - p)).sqrt());
    let chol = b_factor(k, &sw)?;
    let log_det: f64 = (0..n).map(|i| chol[(i, i)].ln()).sum();
    let log_marginal = obj - log_det;
    Ok(LaplaceState { f, a, pi, sqrt_w: sw, chol, log_marginal, iterations })
}

/// Approximate log marginal likelihood and its gradient with respect to
/// `[ln sigma_f^2, ln length_scale]`.
pub fn log_marginal_and_gradient(
    d2: &DMatrix<f64>,
    t: &[f64],
    theta: [f64; 2],
    p: &GpcParams,
) -> Result<(f64, [f64; 2], LaplaceState)> {
    let n = d2.nrows();
    let k = kernel_matrix(d2, theta);
    let st = laplace_mode(&k, t, p.newton_tol, p.max_newton)?;
    let l = &st.chol;
    let sw = &st.sqrt_w;
    let lt = l.transpose();

    // R = W^½ L^-T L^-1 W^½
    let m = l.solve_lower_triangular(&DMatrix::from_diagonal(sw)).expect("factor");
    let mut r = lt.solve_upper_triangular(&m).expect("factor");
    for i in 0..n {
        r.row_mut(i).scale_mut(sw[i]);
    }
    // C = L^-1 W^½ K
    let mut swk = k.clone();
    for i in 0..n {
        swk.row_mut(i).scale_mut(sw[i]);
    }
    let c = l.solve_lower_triangular(&swk).expect("factor");
    // dW/df = -(d^3/df^3) log p = pi (1 - pi) (1 - 2 pi)
    let dw = st.pi.map(|q| q * (1.0 - q) * (1.0 - 2.0 * q));
    let s2 = DVector::from_fn(n, |i, _| {
        let ctc = c.column(i).norm_squared();
        -0.5 * (k[(i, i)] - ctc) * dw[i]
    });
    let tv = DVector::from_column_slice(t);
    let dlp = &tv - &st.pi;

    let l2 = (2.0 * theta[1]).exp();
    let dk = [k.clone(), k.zip_map(d2, |kv, dv| kv * dv / l2)];
    let mut grad = [0.0; 2];
    for (g, cj) in grad.iter_mut().zip(&dk) {
        let s1 = 0.5 * st.a.dot(&(cj * &st.a)) - 0.5 * r.component_mul(cj).sum();
        let b = cj * &dlp;
        let s3 = &b - &k * (&r * &b);
        *g = s1 + s2.dot(&s3);
    }
    Ok((st.log_marginal, grad, st))
}

fn median_distance(d2: &DMatrix<f64>) -> f64 {
    let n = d2.nrows();
    let mut v: Vec<f64> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| d2[(i, j)].sqrt()).collect();
    v.retain(|x| *x > 0.0);
    if v.is_empty() {
        return 1.0;
    }
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

struct Ascent {
    theta: [f64; 2],
    value: f64,
    iterations: usize,
    converged: bool,
}

fn ascend(d2: &DMatrix<f64>, t: &[f64], start: [f64; 2], bounds: [(f64, f64); 2], p: &GpcParams) -> Result<Ascent> {
    let clamp = |th: [f64; 2]| [th[0].clamp(bounds[0].0, bounds[0].1), th[1].clamp(bounds[1].0, bounds[1].1)];
    let mut theta = clamp(start);
    let (mut value, mut grad, _) = log_marginal_and_gradient(d2, t, theta, p)?;
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < p.max_iterations {
        iterations += 1;
        let gnorm = grad[0].abs().max(grad[1].abs());
        if gnorm < 1e-5 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while step > 1e-12 {
            let cand = clamp([theta[0] + step * grad[0], theta[1] + step * grad[1]]);
            let moved = (cand[0] - theta[0]) * grad[0] + (cand[1] - theta[1]) * grad[1];
            if moved <= 0.0 {
                break;
            }
            let (v, g, _) = log_marginal_and_gradient(d2, t, cand, p)?;
            if v >= value + 1e-4 * moved {
                let gain = v - value;
                theta = cand;
                value = v;
                grad = g;
                step *= 2.0;
                accepted = true;
                if gain < 1e-10 * value.abs().max(1.0) {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Stationary up to the box constraints.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    Ok(Ascent { theta, value, iterations, converged })
}

pub(crate) fn fit(x: &Features, labels: &[u8], p: &GpcParams, seed: u64) -> Result<(GpcModel, TrainingInfo)> {
    let t: Vec<f64> = labels.iter().map(|&l| l as f64).collect();
    let d2 = pairwise_sq_dists(x);
    let ln_med = median_distance(&d2).ln();
    let bounds = [(-10.0, 10.0), (ln_med - 6.0, ln_med + 6.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Ascent> = None;
    let mut total_iterations = 0;
    for restart in 0..p.restarts {
        let start = if restart == 0 {
            [0.0, ln_med]
        } else {
            [rng.gen_range(-2.0..4.0), ln_med + rng.gen_range(-2.0..2.0)]
        };
        let run = ascend(&d2, &t, start, bounds, p)?;
        total_iterations += run.iterations;
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let k = kernel_matrix(&d2, best.theta);
    let st = laplace_mode(&k, &t, p.newton_tol, p.max_newton)?;
    let n = x.n();
    let mut chol = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            chol[i * n + j] = st.chol[(i, j)];
        }
    }
    let model = GpcModel {
        theta: best.theta,
        train: x.clone(),
        dlp: t.iter().zip(st.pi.iter()).map(|(a, b)| a - b).collect(),
        sqrt_w: st.sqrt_w.iter().copied().collect(),
        chol,
        log_marginal: st.log_marginal,
    };
    let info = TrainingInfo { iterations: total_iterations, converged: best.converged, objective: best.value };
    Ok((model, info))
}
