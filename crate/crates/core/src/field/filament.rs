use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::{Point, Segment};
use crate::mom::quadrature::{GL8_NODES, GL8_WEIGHTS};
use crate::mom::{mirror_segment, CurrentSolution};
use crate::{EPSILON_0, MU_0, SPEED_OF_LIGHT};

pub type CVec3 = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A straight filament carrying a current that varies linearly from
/// `current_start` to `current_end`. Its charge follows from continuity:
/// a uniform line charge plus point charges at both ends.
#[derive(Clone, Debug)]
pub struct Filament {
    pub segment: Segment,
    pub current_start: Complex64,
    pub current_end: Complex64,
}

impl Filament {
    pub fn new(start: Point, end: Point, current_start: Complex64, current_end: Complex64) -> Self {
        let d = end - start;
        let length = d.norm();
        Filament {
            segment: Segment { start, end, tangent: d / length, length },
            current_start,
            current_end,
        }
    }

    /// Ground-plane image: geometric mirror with the current reversed.
    pub fn image(&self) -> Filament {
        Filament {
            segment: mirror_segment(&self.segment),
            current_start: -self.current_start,
            current_end: -self.current_end,
        }
    }
}

/// Filaments of a moment-method solution, with images when the ground plane
/// is present.
pub fn solution_filaments(solution: &CurrentSolution, ground_plane: bool) -> Vec<Filament> {
    let mut out: Vec<Filament> = solution
        .mesh
        .segments
        .iter()
        .zip(solution.segment_currents())
        .map(|(s, (a, b))| Filament { segment: s.clone(), current_start: a, current_end: b })
        .collect();
    if ground_plane {
        let images: Vec<Filament> = out.iter().map(Filament::image).collect();
        out.extend(images);
    }
    out
}

/// `(E, H)` radiated by `filaments` at `point`, in V/m and A/m.
pub fn fields_at(filaments: &[Filament], point: &Point, frequency: f64) -> (CVec3, CVec3) {
    let omega = 2.0 * PI * frequency;
    let k = omega / SPEED_OF_LIGHT;
    let j_omega = Complex64::new(0.0, omega);
    let mut e = [ZERO; 3];
    let mut h = [ZERO; 3];

    for f in filaments {
        let seg = &f.segment;
        let slope = (f.current_end - f.current_start) / seg.length;
        let line_charge = -slope / j_omega;
        for (t, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            let src = seg.point_at(*t);
            let current = f.current_start + slope * (t * seg.length);
            let dl = w * seg.length;
            let (g, grad) = green_and_gradient(point, &src, k);
            // E = -jωμ I t G - (1/ε) λ ∇G ; H = I ∇G × t
            for c in 0..3 {
                e[c] -= j_omega * MU_0 * current * seg.tangent[c] * g * dl;
                e[c] -= line_charge * grad[c] * (dl / EPSILON_0);
            }
            let cross = cross(&grad, &seg.tangent);
            for c in 0..3 {
                h[c] += current * cross[c] * dl;
            }
        }
        for (q, at) in [
            (-f.current_start / j_omega, seg.start),
            (f.current_end / j_omega, seg.end),
        ] {
            if q == ZERO {
                continue;
            }
            let (_, grad) = green_and_gradient(point, &at, k);
            for c in 0..3 {
                e[c] -= q * grad[c] / EPSILON_0;
            }
        }
    }
    (e, h)
}

/// Free-space Green's function and its gradient with respect to the
/// observation point.
fn green_and_gradient(obs: &Point, src: &Point, k: f64) -> (Complex64, CVec3) {
    let d = obs - src;
    let r = d.norm();
    let phase = Complex64::new(0.0, -k * r).exp();
    let g = phase / (4.0 * PI * r);
    let dg_dr = -(Complex64::new(1.0, k * r)) * phase / (4.0 * PI * r * r);
    let scale = dg_dr / r;
    (g, [scale * d.x, scale * d.y, scale * d.z])
}

fn cross(a: &CVec3, b: &Point) -> CVec3 {
    [
        a[1] * b.z - a[2] * b.y,
        a[2] * b.x - a[0] * b.z,
        a[0] * b.y - a[1] * b.x,
    ]
}

/// Shortest distance from `p` to the segment.
pub fn distance_to_segment(p: &Point, seg: &Segment) -> f64 {
    let u = (p - seg.start).dot(&seg.tangent).clamp(0.0, seg.length);
    (p - seg.point_at(u / seg.length)).norm()
}
