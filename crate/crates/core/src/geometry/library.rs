use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Placement, Point, WireGeometry, LABEL_CLOSED};
use crate::error::{Error, Result};

/// Shortest edge the fillet polygonalization is allowed to emit (meters).
const MIN_ARC_CHORD: f64 = 0.005;
/// Target chord length when polygonalizing fillet arcs (meters).
const ARC_CHORD: f64 = 0.008;
const MAX_ATTEMPTS: usize = 1000;
pub const SHAPES_PER_CLASS: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LibraryConfig {
    /// Side of the square scan footprint (meters).
    pub extent: f64,
    /// Wire elevation above the ground plane (meters).
    pub height: f64,
    pub radius: f64,
    /// Nominal arm / polygon side length (meters).
    pub side_length: f64,
    /// Relative uniform jitter applied to each side length.
    pub side_jitter: f64,
    /// Fillet radius range for corner rounding (meters).
    pub fillet_min: f64,
    pub fillet_max: f64,
    /// Fraction of each class that receives half-size / rounding / rotation.
    pub modified_fraction: f64,
}

impl Default for LibraryConfig {
    fn default() -> Self {
        LibraryConfig {
            extent: 0.3,
            height: 0.01,
            radius: 0.001,
            side_length: 0.10,
            side_jitter: 0.2,
            fillet_min: 0.01,
            fillet_max: 0.03,
            modified_fraction: 0.5,
        }
    }
}

impl LibraryConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.height > 0.0) || !(self.radius > 0.0) {
            return bad("height and radius must be positive".into());
        }
        if !(0.0..1.0).contains(&self.side_jitter) {
            return bad(format!("side_jitter {} must lie in [0, 1)", self.side_jitter));
        }
        if !(self.fillet_min > 0.0 && self.fillet_min <= self.fillet_max) {
            return bad("fillet range must be positive and ordered".into());
        }
        if !(0.0..=1.0).contains(&self.modified_fraction) {
            return bad("modified_fraction must lie in [0, 1]".into());
        }
        if !(self.side_length > 0.0) || self.extent < self.side_length {
            return bad(format!(
                "extent {} m cannot contain a {} m shape",
                self.extent, self.side_length
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpenFamily {
    L,
    U,
    Z,
    S,
}

#[derive(Clone, Copy, Debug, Default)]
struct Modifiers {
    half_size: bool,
    rounding: bool,
    rotation: bool,
}

/// Generates the 32 closed + 32 open training shapes. Identical
/// `(config, seed)` pairs give bit-identical libraries.
pub fn generate_wire_library(config: &LibraryConfig, seed: u64) -> Result<Vec<WireGeometry>> {
    config.validate()?;
    let mut library = Vec::with_capacity(2 * SHAPES_PER_CLASS);
    for closed in [true, false] {
        for index in 0..SHAPES_PER_CLASS {
            library.push(generate_shape(config, seed, closed, index)?);
        }
    }
    Ok(library)
}

fn shape_rng(seed: u64, closed: bool, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((!closed as u64) << 32) | index as u64);
    rng
}

fn generate_shape(
    config: &LibraryConfig,
    seed: u64,
    closed: bool,
    index: usize,
) -> Result<WireGeometry> {
    let mut rng = shape_rng(seed, closed, index);
    let id = format!("{}-{index:02}", if closed { "closed" } else { "open" });
    let modified_count = (config.modified_fraction * SHAPES_PER_CLASS as f64).round() as usize;
    let modifiers = if index >= SHAPES_PER_CLASS - modified_count {
        draw_modifiers(&mut rng)
    } else {
        Modifiers::default()
    };

    for _ in 0..MAX_ATTEMPTS {
        let scale = if modifiers.half_size { 0.5 } else { 1.0 };
        let (mut outline, families_corner_count) = if closed {
            let sides = rng.gen_range(3..=8);
            (closed_polygon(config, scale, sides, &mut rng), sides)
        } else {
            let family = [OpenFamily::L, OpenFamily::U, OpenFamily::Z, OpenFamily::S]
                [index % 4];
            let arms = open_arms(config, scale, family, &mut rng);
            let n = arms.len();
            (arms, n - 2)
        };
        if modifiers.rounding && families_corner_count > 0 {
            outline = round_corners(config, &outline, closed, &mut rng);
        }
        let angle = if modifiers.rotation { rng.gen_range(0.0..2.0 * PI) } else { 0.0 };
        let placed = place(config, &outline, angle);
        let inside = placed.iter().all(|p| {
            (0.0..=config.extent).contains(&p[0]) && (0.0..=config.extent).contains(&p[1])
        });
        if !inside {
            continue;
        }
        let vertices: Vec<Point> =
            placed.iter().map(|p| Point::new(p[0], p[1], config.height)).collect();
        let (placement, source_segment) = draw_source(&vertices, closed, &mut rng);
        let geometry =
            WireGeometry::new(id.clone(), vertices, closed, config.radius, placement, source_segment)?;
        debug_assert_eq!(geometry.label == LABEL_CLOSED, closed);
        return Ok(geometry);
    }
    Err(Error::Geometry {
        id,
        reason: format!(
            "no placement inside the {} m footprint after {MAX_ATTEMPTS} attempts",
            config.extent
        ),
    })
}

fn draw_modifiers(rng: &mut ChaCha8Rng) -> Modifiers {
    // Non-empty subset of the three modifiers.
    let mask = rng.gen_range(1..8u8);
    Modifiers { half_size: mask & 1 != 0, rounding: mask & 2 != 0, rotation: mask & 4 != 0 }
}

fn jittered(config: &LibraryConfig, scale: f64, rng: &mut ChaCha8Rng) -> f64 {
    let j = config.side_jitter;
    scale * config.side_length * (1.0 + rng.gen_range(-j..=j))
}

/// Star-shaped polygon around the origin; returned with the first vertex
/// repeated at the end.
fn closed_polygon(
    config: &LibraryConfig,
    scale: f64,
    sides: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 2]> {
    let step = 2.0 * PI / sides as f64;
    let irregular = rng.gen_bool(0.5);
    let mut points = Vec::with_capacity(sides + 1);
    let base_side = jittered(config, scale, rng);
    let circumradius = base_side / (2.0 * (PI / sides as f64).sin());
    let phase = if sides == 4 { PI / 4.0 } else { PI / 2.0 };
    for i in 0..sides {
        let (da, dr) = if irregular {
            let j = config.side_jitter;
            (rng.gen_range(-0.2..=0.2) * step, 1.0 + rng.gen_range(-j..=j))
        } else {
            (0.0, 1.0)
        };
        let theta = phase + i as f64 * step + da;
        let r = circumradius * dr;
        points.push([r * theta.cos(), r * theta.sin()]);
    }
    points.push(points[0]);
    points
}

/// Straight-armed bent dipoles built from axis-aligned arms.
fn open_arms(
    config: &LibraryConfig,
    scale: f64,
    family: OpenFamily,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 2]> {
    let mut arm = || jittered(config, scale, rng);
    // Headings of each arm in units of quarter turns.
    let headings: &[i32] = match family {
        OpenFamily::L => &[0, 1],
        OpenFamily::U => &[3, 0, 1],
        OpenFamily::Z => &[0, 1, 0],
        OpenFamily::S => &[0, 1, 2, 1],
    };
    let mut points = vec![[0.0, 0.0]];
    let mut cursor = [0.0, 0.0];
    for &h in headings {
        let len = arm();
        let a = h as f64 * PI / 2.0;
        cursor = [cursor[0] + len * a.cos(), cursor[1] + len * a.sin()];
        points.push(cursor);
    }
    points
}

/// Replaces a random non-empty, non-total subset of corners with
/// polygonalized circular fillets.
fn round_corners(
    config: &LibraryConfig,
    outline: &[[f64; 2]],
    closed: bool,
    rng: &mut ChaCha8Rng,
) -> Vec<[f64; 2]> {
    let n = outline.len() - 1;
    let corners: Vec<usize> = if closed { (0..n).collect() } else { (1..n).collect() };
    let mut chosen: Vec<bool> = corners.iter().map(|_| rng.gen_bool(0.5)).collect();
    if !chosen.iter().any(|&c| c) {
        let k = rng.gen_range(0..corners.len());
        chosen[k] = true;
    }
    if corners.len() > 1 && chosen.iter().all(|&c| c) {
        let k = rng.gen_range(0..corners.len());
        chosen[k] = false;
    }
    let radii: Vec<f64> =
        corners.iter().map(|_| rng.gen_range(config.fillet_min..=config.fillet_max)).collect();

    let vertex = |i: usize| outline[i % n];
    let mut arcs: Vec<Option<Vec<[f64; 2]>>> = vec![None; n + 1];
    for (k, &v) in corners.iter().enumerate() {
        if !chosen[k] {
            continue;
        }
        let prev = if v == 0 { vertex(n - 1) } else { vertex(v - 1) };
        let here = vertex(v);
        let next = vertex(v + 1);
        arcs[v] = fillet(prev, here, next, radii[k]);
    }

    let mut result = Vec::new();
    for v in 0..n {
        match &arcs[v] {
            Some(arc) => result.extend_from_slice(arc),
            None => result.push(vertex(v)),
        }
    }
    if closed {
        // Start the loop on an unrounded corner so vertex 0 stays a corner.
        let start = corners.iter().zip(&chosen).find(|(_, &c)| !c).map(|(&v, _)| v);
        if let Some(start_vertex) = start {
            let target = vertex(start_vertex);
            let offset = result.iter().position(|p| *p == target).unwrap_or(0);
            result.rotate_left(offset);
        }
        result.push(result[0]);
    } else {
        result.push(outline[n]);
    }
    result
}

/// Polygonalized arc tangent to both edges meeting at `here`, or `None` when
/// the arc would be too short to mesh.
fn fillet(prev: [f64; 2], here: [f64; 2], next: [f64; 2], radius: f64) -> Option<Vec<[f64; 2]>> {
    let sub = |a: [f64; 2], b: [f64; 2]| [a[0] - b[0], a[1] - b[1]];
    let norm = |a: [f64; 2]| a[0].hypot(a[1]);
    let d_in = sub(here, prev);
    let d_out = sub(next, here);
    let (len_in, len_out) = (norm(d_in), norm(d_out));
    let d1 = [d_in[0] / len_in, d_in[1] / len_in];
    let d2 = [d_out[0] / len_out, d_out[1] / len_out];
    let turn = (d1[0] * d2[0] + d1[1] * d2[1]).clamp(-1.0, 1.0).acos();
    if turn < 1e-6 {
        return None;
    }
    let cross = d1[0] * d2[1] - d1[1] * d2[0];
    let max_tangent = 0.35 * len_in.min(len_out);
    let radius = radius.min(max_tangent / (turn / 2.0).tan());
    let tangent = radius * (turn / 2.0).tan();
    let arc_length = radius * turn;
    if arc_length < MIN_ARC_CHORD {
        return None;
    }
    let pieces = ((arc_length / ARC_CHORD).round() as usize).max(1);
    let p1 = [here[0] - d1[0] * tangent, here[1] - d1[1] * tangent];
    // Inward normal: d1 rotated a quarter turn toward the bend.
    let sign = cross.signum();
    let normal = [-d1[1] * sign, d1[0] * sign];
    let center = [p1[0] + normal[0] * radius, p1[1] + normal[1] * radius];
    let start_angle = (p1[1] - center[1]).atan2(p1[0] - center[0]);
    let points = (0..=pieces)
        .map(|i| {
            let a = start_angle + sign * turn * i as f64 / pieces as f64;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect::<Vec<_>>();
    let chord = radius * 2.0 * (turn / pieces as f64 / 2.0).sin();
    (chord >= MIN_ARC_CHORD * 0.8).then_some(points)
}

/// Centers the bounding box on the footprint center, then rotates about it.
fn place(config: &LibraryConfig, outline: &[[f64; 2]], angle: f64) -> Vec<[f64; 2]> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in outline {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mid = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let c = config.extent / 2.0;
    let (s, co) = angle.sin_cos();
    outline
        .iter()
        .map(|p| {
            let (x, y) = (p[0] - mid[0], p[1] - mid[1]);
            [c + co * x - s * y, c + s * x + co * y]
        })
        .collect()
}

fn draw_source(vertices: &[Point], closed: bool, rng: &mut ChaCha8Rng) -> (Placement, usize) {
    let options: &[Placement] = if closed {
        &[Placement::Middle, Placement::Corner]
    } else {
        &[Placement::Middle, Placement::Corner, Placement::Ending]
    };
    let placement = *options.choose(rng).expect("non-empty");
    let probe = WireGeometry {
        id: String::new(),
        vertices: vertices.to_vec(),
        closed,
        radius: 0.0,
        height: 0.0,
        source_segment: 0,
        placement,
        label: 0,
    };
    let edges = probe.edge_count();
    let segment = match placement {
        Placement::Middle => {
            let half = probe.path_length() / 2.0;
            let mut run = 0.0;
            (0..edges)
                .find(|&i| {
                    run += probe.edge_length(i);
                    run >= half
                })
                .unwrap_or(edges - 1)
        }
        Placement::Corner => {
            let corners = probe.corner_vertices();
            *corners.choose(rng).expect("every library shape bends")
        }
        Placement::Ending => {
            if rng.gen_bool(0.5) {
                0
            } else {
                edges - 1
            }
        }
    };
    (placement, segment)
}
