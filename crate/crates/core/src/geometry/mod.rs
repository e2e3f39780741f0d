//! Wire geometries radiating above the ground plane, the 64-shape training
//! library, and the segment meshes consumed by the moment-method solver.

mod library;
mod manifest;
mod mesh;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use library::{generate_wire_library, LibraryConfig, OpenFamily};
pub use manifest::{parse_library_manifest, write_library_manifest};
pub use mesh::{mesh_wire, mesh_wire_refined, EndCondition, Segment, SegmentMesh};

pub type Point = Vector3<f64>;

/// Tolerance used for endpoint coincidence and coplanarity checks (meters).
pub const POSITION_TOL: f64 = 1e-9;

/// Class label of a closed (loop, magnetic-type) radiator.
pub const LABEL_CLOSED: u8 = 0;
/// Class label of an open (bent dipole, electric-type) radiator.
pub const LABEL_OPEN: u8 = 1;

/// Where along the wire the 1 V delta-gap source sits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// Node nearest the path-length midpoint.
    Middle,
    /// Node on the vertex that starts `source_segment`.
    Corner,
    /// First (`source_segment == 0`) or last segment of an open wire.
    Ending,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Middle => "middle",
            Placement::Corner => "corner",
            Placement::Ending => "ending",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "middle" => Some(Placement::Middle),
            "corner" => Some(Placement::Corner),
            "ending" => Some(Placement::Ending),
            _ => None,
        }
    }
}

/// A thin wire routed parallel to the ground plane.
///
/// `vertices` is the polyline path; a closed wire repeats its first vertex at
/// the end. Edge `i` runs from `vertices[i]` to `vertices[i + 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireGeometry {
    pub id: String,
    pub vertices: Vec<Point>,
    pub closed: bool,
    pub radius: f64,
    pub height: f64,
    pub source_segment: usize,
    pub placement: Placement,
    pub label: u8,
}

impl WireGeometry {
    /// Builds a geometry and checks every invariant. The label follows from
    /// the topology.
    pub fn new(
        id: impl Into<String>,
        vertices: Vec<Point>,
        closed: bool,
        radius: f64,
        placement: Placement,
        source_segment: usize,
    ) -> Result<Self> {
        let height = vertices.first().map(|v| v.z).unwrap_or(0.0);
        let geometry = WireGeometry {
            id: id.into(),
            vertices,
            closed,
            radius,
            height,
            source_segment,
            placement,
            label: if closed { LABEL_CLOSED } else { LABEL_OPEN },
        };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        (self.vertices[i + 1] - self.vertices[i]).norm()
    }

    pub fn path_length(&self) -> f64 {
        (0..self.edge_count()).map(|i| self.edge_length(i)).sum()
    }

    /// Vertices where the path changes direction. For closed wires vertex 0
    /// is included when the closing edge turns into the first one.
    pub fn corner_vertices(&self) -> Vec<usize> {
        let n = self.edge_count();
        let dir = |i: usize| (self.vertices[i + 1] - self.vertices[i]).normalize();
        let mut corners = Vec::new();
        let range = if self.closed { 0..n } else { 1..n };
        for v in range {
            let incoming = if v == 0 { dir(n - 1) } else { dir(v - 1) };
            let outgoing = dir(v);
            if incoming.dot(&outgoing) < 1.0 - 1e-9 {
                corners.push(v);
            }
        }
        corners
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::Geometry { id: self.id.clone(), reason });
        if self.vertices.len() < 2 {
            return fail("needs at least two vertices".into());
        }
        if self.closed && self.vertices.len() < 4 {
            return fail("a closed wire needs at least three edges".into());
        }
        let first = self.vertices[0];
        let last = self.vertices[self.vertices.len() - 1];
        let gap = (last - first).norm();
        if self.closed && gap > POSITION_TOL {
            return fail(format!("closed wire endpoints differ by {gap:e} m"));
        }
        if !self.closed && gap <= POSITION_TOL {
            return fail("open wire endpoints coincide".into());
        }
        let expected_label = if self.closed { LABEL_CLOSED } else { LABEL_OPEN };
        if self.label != expected_label {
            return fail(format!("label {} contradicts closed={}", self.label, self.closed));
        }
        if !(self.height > 0.0) {
            return fail(format!("height {} must be positive", self.height));
        }
        if let Some(v) = self.vertices.iter().find(|v| (v.z - self.height).abs() > POSITION_TOL) {
            return fail(format!("vertex z={} differs from height {}", v.z, self.height));
        }
        if !(self.radius > 0.0) {
            return fail(format!("radius {} must be positive", self.radius));
        }
        let shortest = (0..self.edge_count())
            .map(|i| self.edge_length(i))
            .fold(f64::INFINITY, f64::min);
        if self.radius >= shortest {
            return fail(format!("radius {} not below shortest edge {shortest}", self.radius));
        }
        if self.source_segment >= self.edge_count() {
            return fail(format!("source segment {} out of range", self.source_segment));
        }
        match self.placement {
            Placement::Ending if self.closed => {
                return fail("closed wires have no ending segment".into());
            }
            Placement::Ending
                if self.source_segment != 0 && self.source_segment + 1 != self.edge_count() =>
            {
                return fail(format!("segment {} is not an ending", self.source_segment));
            }
            Placement::Corner if !self.corner_vertices().contains(&self.source_segment) => {
                return fail(format!("vertex {} is not a corner", self.source_segment));
            }
            _ => {}
        }
        Ok(())
    }
}
