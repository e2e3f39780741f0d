//! Segment-pair integrals of the thin-wire reduced kernel
//! `G(R) = exp(-jkR) / (4πR)`, `R = sqrt(|r - r'|² + a²)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::quadrature::{GL8_NODES, GL8_WEIGHTS};
use crate::geometry::{Point, Segment};

/// Outer-integral panels used when the two segments touch or coincide.
const NEAR_PANELS: usize = 4;

/// Linear shape functions on a segment: index 0 rises from 0 at the start to
/// 1 at the end, index 1 falls from 1 to 0.
pub type PairMoments = [[Complex64; 2]; 2];

/// Mirror image of a point through the ground plane z = 0.
pub fn mirror(p: &Point) -> Point {
    Point::new(p.x, p.y, -p.z)
}

pub fn mirror_segment(s: &Segment) -> Segment {
    Segment {
        start: mirror(&s.start),
        end: mirror(&s.end),
        tangent: Point::new(s.tangent.x, s.tangent.y, -s.tangent.z),
        length: s.length,
    }
}

/// `∫ ψ_j(u) G(R(u)) du` over `source` for a fixed observation point, for
/// the rising (`j = 0`) and falling (`j = 1`) shape functions. The static
/// `1/R` part is integrated in closed form; the smooth remainder
/// `(exp(-jkR) - 1)/R` by 8-point Gauss–Legendre.
pub fn source_line_integrals(
    observer: &Point,
    source: &Segment,
    wavenumber: f64,
    radius: f64,
) -> [Complex64; 2] {
    let length = source.length;
    let rel = observer - source.start;
    let u0 = rel.dot(&source.tangent);
    let rho2 = (rel.norm_squared() - u0 * u0).max(0.0) + radius * radius;
    let rho = rho2.sqrt();

    let r_at = |u: f64| ((u - u0) * (u - u0) + rho2).sqrt();
    let static_all = ((length - u0) / rho).asinh() - (-u0 / rho).asinh();
    let static_u = r_at(length) - r_at(0.0) + u0 * static_all;
    let static_rise = static_u / length;
    let static_fall = static_all - static_rise;

    let mut smooth_rise = Complex64::new(0.0, 0.0);
    let mut smooth_fall = Complex64::new(0.0, 0.0);
    for (t, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
        let r = r_at(t * length);
        let kr = wavenumber * r;
        // (exp(-jkR) - 1) / R, expanded near kR = 0 to avoid cancellation.
        let f = if kr < 1e-4 {
            Complex64::new(-kr * wavenumber / 2.0, -wavenumber)
        } else {
            Complex64::new(kr.cos() - 1.0, -kr.sin()) / r
        };
        let weighted = f * (w * length);
        smooth_rise += weighted * *t;
        smooth_fall += weighted * (1.0 - t);
    }

    let scale = 1.0 / (4.0 * PI);
    [
        (smooth_rise + static_rise) * scale,
        (smooth_fall + static_fall) * scale,
    ]
}

/// `M[i][j] = ∫_test ∫_source φ_i(s) ψ_j(s') G ds' ds`.
pub fn pair_moments(
    test: &Segment,
    source: &Segment,
    wavenumber: f64,
    radius: f64,
) -> PairMoments {
    let near = segments_touch(test, source);
    let panels = if near { NEAR_PANELS } else { 1 };
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for panel in 0..panels {
        for (t, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
            let s = (panel as f64 + t) / panels as f64;
            let weight = w * test.length / panels as f64;
            let inner = source_line_integrals(&test.point_at(s), source, wavenumber, radius);
            let shape = [s, 1.0 - s];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += inner[j] * (shape[i] * weight);
                }
            }
        }
    }
    m
}

fn segments_touch(a: &Segment, b: &Segment) -> bool {
    let tol = 1e-9;
    [a.start, a.end]
        .iter()
        .any(|p| (p - b.start).norm() < tol || (p - b.end).norm() < tol)
}
