//! Near-field scans of solved wire currents on a planar probe grid.

mod filament;
mod grid_text;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mom::{CurrentSolution, SolveConfig};

pub use filament::{distance_to_segment, fields_at, solution_filaments, CVec3, Filament};
pub use grid_text::{parse_grid_text, write_grid_text, GridText, GridUnits};

/// dB floor applied to every normalized magnitude map.
pub const DB_FLOOR: f64 = -60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldKind {
    E,
    H,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::E => "E",
            FieldKind::H => "H",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "e" | "E" => Some(FieldKind::E),
            "h" | "H" => Some(FieldKind::H),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    Total,
    X,
    Y,
    Z,
}

impl Combine {
    pub const ALL: [Combine; 4] = [Combine::X, Combine::Y, Combine::Z, Combine::Total];

    pub fn as_str(self) -> &'static str {
        match self {
            Combine::Total => "total",
            Combine::X => "x",
            Combine::Y => "y",
            Combine::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "total" => Some(Combine::Total),
            "x" => Some(Combine::X),
            "y" => Some(Combine::Y),
            "z" => Some(Combine::Z),
            _ => None,
        }
    }

    fn magnitude(self, v: &CVec3) -> f64 {
        match self {
            Combine::Total => v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            Combine::X => v[0].norm(),
            Combine::Y => v[1].norm(),
            Combine::Z => v[2].norm(),
        }
    }
}

/// Equally spaced probes on a horizontal plane. Probe `(i, j)` sits at
/// `(x_min + i·dx, y_min + j·dy, plane_height)` and is stored at index
/// `i·ny + j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeGrid {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub y_min: f64,
    pub extent_x: f64,
    pub extent_y: f64,
    pub plane_height: f64,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid {
            nx: 30,
            ny: 30,
            x_min: 0.0,
            y_min: 0.0,
            extent_x: 0.3,
            extent_y: 0.3,
            plane_height: 0.02,
        }
    }
}

impl ProbeGrid {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Config("probe grid needs at least 2×2 probes".into()));
        }
        if !(self.extent_x > 0.0 && self.extent_y > 0.0) {
            return Err(Error::Config("probe grid extent must be positive".into()));
        }
        if !(self.plane_height >= 0.0) {
            return Err(Error::Config("probe plane height must be non-negative".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.extent_x / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        self.extent_y / (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, i: usize, j: usize) -> Point {
        Point::new(
            self.x_min + i as f64 * self.dx(),
            self.y_min + j as f64 * self.dy(),
            self.plane_height,
        )
    }

    pub fn with_height(&self, plane_height: f64) -> ProbeGrid {
        ProbeGrid { plane_height, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub geometry_id: String,
    pub kind: FieldKind,
    pub grid: ProbeGrid,
    /// Complex field vectors in probe order `i·ny + j`.
    pub samples: Vec<CVec3>,
}

impl FieldMap {
    pub fn sample(&self, i: usize, j: usize) -> &CVec3 {
        &self.samples[i * self.grid.ny + j]
    }

    /// Multiplies every sample by `alpha`.
    pub fn scaled(&self, alpha: Complex64) -> FieldMap {
        let samples = self.samples.iter().map(|v| [v[0] * alpha, v[1] * alpha, v[2] * alpha]).collect();
        FieldMap { samples, ..self.clone() }
    }
}

/// Samples the radiated E or H field of `solution` (plus its ground-plane
/// image when enabled) on every probe of `grid`.
pub fn compute_field_map(
    solution: &CurrentSolution,
    grid: &ProbeGrid,
    kind: FieldKind,
    config: &SolveConfig,
) -> Result<FieldMap> {
    grid.validate()?;
    let radius = solution.mesh.radius;
    for index in 0..grid.len() {
        let p = grid.position(index / grid.ny, index % grid.ny);
        if solution.mesh.segments.iter().any(|s| distance_to_segment(&p, s) <= radius) {
            return Err(Error::ProbeInsideWire { index, x: p.x, y: p.y, z: p.z });
        }
    }
    let filaments = solution_filaments(solution, config.ground_plane);
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|index| {
            let p = grid.position(index / grid.ny, index % grid.ny);
            let (e, h) = fields_at(&filaments, &p, config.frequency);
            match kind {
                FieldKind::E => e,
                FieldKind::H => h,
            }
        })
        .collect();
    Ok(FieldMap { geometry_id: solution.geometry_id.clone(), kind, grid: grid.clone(), samples })
}

/// Row-major real grid (`rows × cols`), used for dB maps and rasters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealGrid {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl RealGrid {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "grid size mismatch");
        RealGrid { rows, cols, values }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        RealGrid { rows, cols, values: vec![value; rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.cols + c] = v;
    }
}

/// `20·log10(m / max m)` per probe, floored at [`DB_FLOOR`]. Rows follow
/// the probe `i` index.
pub fn field_magnitude_db(map: &FieldMap, combine: Combine) -> Result<RealGrid> {
    let magnitudes: Vec<f64> = map.samples.iter().map(|v| combine.magnitude(v)).collect();
    let reference = magnitudes.iter().copied().fold(0.0, f64::max);
    if !(reference > 0.0) || !reference.is_finite() {
        return Err(Error::ZeroField(map.geometry_id.clone()));
    }
    let values = magnitudes
        .iter()
        .map(|&m| {
            if m == reference {
                0.0
            } else if m > 0.0 {
                (20.0 * (m / reference).log10()).max(DB_FLOOR)
            } else {
                DB_FLOOR
            }
        })
        .collect();
    Ok(RealGrid::new(map.grid.nx, map.grid.ny, values))
}
