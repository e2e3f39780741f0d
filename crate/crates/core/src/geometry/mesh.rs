use serde::{Deserialize, Serialize};

use super::{Placement, Point, WireGeometry};
use crate::error::{Error, Result};
use crate::SPEED_OF_LIGHT;

/// Absolute lower bound on segment length (meters).
pub const MIN_SEGMENT: f64 = 0.004;
/// Segments never exceed this fraction of a wavelength.
pub const MAX_SEGMENT_WAVELENGTHS: f64 = 1.0 / 20.0;
/// Segment length must be at least this multiple of the wire radius.
pub const MIN_SEGMENT_RADII: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
    pub tangent: Point,
    pub length: f64,
}

impl Segment {
    fn new(start: Point, end: Point) -> Self {
        let d = end - start;
        let length = d.norm();
        Segment { start, end, tangent: d / length, length }
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.start + self.tangent * (t * self.length)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndCondition {
    /// Closed loop: the last segment connects back to the first.
    Periodic,
    /// Open wire: the current vanishes at both free ends.
    VanishingEnds,
}

/// Straight-segment discretization carrying rooftop basis functions.
///
/// Basis `i` is the triangle centered on node `node_of_basis(i)`: it rises
/// linearly across the segment ending at that node and falls across the
/// segment starting there. Node `j` is `segments[j].start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentMesh {
    pub geometry_id: String,
    pub segments: Vec<Segment>,
    pub basis_count: usize,
    pub endpoint_condition: EndCondition,
    /// Basis function driven by the delta-gap source.
    pub source_basis: usize,
    pub radius: f64,
}

impl SegmentMesh {
    pub fn node_of_basis(&self, basis: usize) -> usize {
        match self.endpoint_condition {
            EndCondition::Periodic => basis,
            EndCondition::VanishingEnds => basis + 1,
        }
    }

    /// `(rising segment, falling segment)` of a basis.
    pub fn basis_support(&self, basis: usize) -> (usize, usize) {
        let n = self.segments.len();
        let node = self.node_of_basis(basis);
        ((node + n - 1) % n, node % n)
    }

    pub fn node_position(&self, node: usize) -> Point {
        if node == self.segments.len() {
            self.segments[node - 1].end
        } else {
            self.segments[node].start
        }
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }
}

/// Meshes with the coarsest subdivision satisfying the length window.
pub fn mesh_wire(geometry: &WireGeometry, frequency: f64) -> Result<SegmentMesh> {
    mesh_wire_refined(geometry, frequency, 1)
}

/// Like [`mesh_wire`] with every edge split into `refinement` times as many
/// segments. Corner vertices always land on segment boundaries.
pub fn mesh_wire_refined(
    geometry: &WireGeometry,
    frequency: f64,
    refinement: usize,
) -> Result<SegmentMesh> {
    let fail = |reason: String| Err(Error::Mesh { id: geometry.id.clone(), reason });
    geometry.validate()?;
    if !(frequency > 0.0) {
        return fail(format!("frequency {frequency} must be positive"));
    }
    if refinement == 0 {
        return fail("refinement must be at least 1".into());
    }
    let wavelength = SPEED_OF_LIGHT / frequency;
    let max_len = wavelength * MAX_SEGMENT_WAVELENGTHS;
    let min_len = MIN_SEGMENT.max(MIN_SEGMENT_RADII * geometry.radius);
    if min_len > max_len {
        return fail(format!(
            "wire radius {} m needs segments >= {min_len} m but lambda/20 = {max_len} m",
            geometry.radius
        ));
    }

    let mut segments = Vec::new();
    let mut vertex_node = Vec::with_capacity(geometry.vertices.len());
    for edge in 0..geometry.edge_count() {
        let (a, b) = (geometry.vertices[edge], geometry.vertices[edge + 1]);
        let length = (b - a).norm();
        if length < min_len {
            return fail(format!("edge {edge} is {length:.5} m, shorter than {min_len} m"));
        }
        let pieces = (length / max_len).ceil() as usize * refinement;
        if length / (pieces as f64) < min_len {
            return fail(format!(
                "edge {edge} split {pieces} ways gives segments under {min_len} m"
            ));
        }
        vertex_node.push(segments.len());
        for k in 0..pieces {
            let t0 = k as f64 / pieces as f64;
            let t1 = (k + 1) as f64 / pieces as f64;
            let start = if k == 0 { a } else { a + (b - a) * t0 };
            let end = if k + 1 == pieces { b } else { a + (b - a) * t1 };
            segments.push(Segment::new(start, end));
        }
    }
    vertex_node.push(segments.len());

    let n = segments.len();
    let (endpoint_condition, basis_count) = if geometry.closed {
        (EndCondition::Periodic, n)
    } else {
        (EndCondition::VanishingEnds, n - 1)
    };
    if basis_count == 0 {
        return fail("mesh has no interior node to carry current".into());
    }

    let mut mesh = SegmentMesh {
        geometry_id: geometry.id.clone(),
        segments,
        basis_count,
        endpoint_condition,
        source_basis: 0,
        radius: geometry.radius,
    };
    mesh.source_basis = source_basis(&mesh, geometry, &vertex_node);
    Ok(mesh)
}

fn source_basis(mesh: &SegmentMesh, geometry: &WireGeometry, vertex_node: &[usize]) -> usize {
    let node_to_basis = |node: usize| match mesh.endpoint_condition {
        EndCondition::Periodic => node % mesh.segments.len(),
        EndCondition::VanishingEnds => node.clamp(1, mesh.basis_count) - 1,
    };
    match geometry.placement {
        Placement::Middle => {
            let half = mesh.total_length() / 2.0;
            let mut best = (f64::INFINITY, 0);
            for basis in 0..mesh.basis_count {
                let node = mesh.node_of_basis(basis);
                let distance = (run_length(mesh, node) - half).abs();
                if distance < best.0 {
                    best = (distance, basis);
                }
            }
            best.1
        }
        Placement::Corner => node_to_basis(vertex_node[geometry.source_segment]),
        Placement::Ending => {
            if geometry.source_segment == 0 {
                0
            } else {
                mesh.basis_count - 1
            }
        }
    }
}

fn run_length(mesh: &SegmentMesh, node: usize) -> f64 {
    mesh.segments[..node].iter().map(|s| s.length).sum()
}
