//! Closed-form and brute-force references, written independently of the
//! library code they check.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use nfscan::classifiers::Features;
use nfscan::{EPSILON_0, MU_0, SPEED_OF_LIGHT};

pub type V3 = Vector3<Complex64>;

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Input impedance of a centre-fed dipole carrying the classical
/// sinusoidal current, by the induced-EMF method: the closed-form axial
/// field of that current is integrated against the current on the wire
/// surface.
pub fn induced_emf_impedance(half_length: f64, radius: f64, frequency: f64) -> Complex64 {
    let k = 2.0 * PI * frequency / SPEED_OF_LIGHT;
    let eta = MU_0 * SPEED_OF_LIGHT;
    let j = Complex64::new(0.0, 1.0);
    let green = |r: f64| (-j * k * r).exp() / r;
    let h = half_length;
    let current = |z: f64| (k * (h - z.abs())).sin();
    let ez = |z: f64| {
        let r1 = (radius * radius + (z - h) * (z - h)).sqrt();
        let r2 = (radius * radius + (z + h) * (z + h)).sqrt();
        let r0 = (radius * radius + z * z).sqrt();
        -j * eta / (4.0 * PI) * (green(r1) + green(r2) - 2.0 * (k * h).cos() * green(r0))
    };
    // Composite Simpson, dense enough to resolve the radius-wide peak at z = 0.
    let n = 400_000;
    let dz = 2.0 * h / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let z = -h + i as f64 * dz;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * current(z) * ez(z);
    }
    acc *= dz / 3.0;
    let i_in = current(0.0);
    -acc / (i_in * i_in)
}

/// Closed-form fields of an elementary dipole (electric moment `p`, or
/// magnetic moment `m` through duality) at offset `r` from it.
/// Returns the "radiating" vector field
/// `e^{-jkR}/(4π) {k²/R (R̂×q)×R̂ + (3R̂(R̂·q) − q)(1/R³ + jk/R²)}`.
pub fn dipole_kernel(q: &V3, r: &Vector3<f64>, k: f64) -> V3 {
    let d = r.norm();
    let u = r / d;
    let uc = u.map(c);
    let phase = Complex64::new(0.0, -k * d).exp() / (4.0 * PI);
    let u_dot_q = uc.dot(q);
    let transverse = q - &uc * u_dot_q;
    let near = &uc * (u_dot_q * 3.0) - q;
    let j = Complex64::new(0.0, 1.0);
    (transverse * c(k * k / d) + near * (c(1.0 / d.powi(3)) + j * k / (d * d))) * phase
}

/// E and H of a Hertzian dipole of moment `i_dl` (A·m) along `dir` at `at`.
pub fn hertzian(i_dl: Complex64, dir: &Vector3<f64>, at: &Vector3<f64>, obs: &Vector3<f64>, f: f64) -> (V3, V3) {
    let omega = 2.0 * PI * f;
    let k = omega / SPEED_OF_LIGHT;
    let j = Complex64::new(0.0, 1.0);
    let p: V3 = dir.map(c) * (i_dl / (j * omega));
    let r = obs - at;
    let e = dipole_kernel(&p, &r, k) / c(EPSILON_0);
    // H = jω p × ∇G-ish: for an elementary current, H = (I dl) × R̂ (jk + 1/R) e^{-jkR}/(4πR).
    let d = r.norm();
    let u = (r / d).map(c);
    let il: V3 = dir.map(c) * i_dl;
    let h = il.cross(&u) * ((j * k + 1.0 / d) * Complex64::new(0.0, -k * d).exp() / (4.0 * PI * d));
    (e, h)
}

/// Exhaustive k-nearest-neighbour vote, written without the library's code.
pub fn brute_force_knn(x: &Features, y: &[u8], q: &[f64], k: usize) -> u8 {
    let mut d: Vec<(f64, usize)> = (0..x.n())
        .map(|i| (x.row(i).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let ones = d[..k].iter().filter(|(_, i)| y[*i] == 1).count();
    u8::from(2 * ones > k)
}
