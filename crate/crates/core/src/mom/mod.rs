//! Thin-wire moment-method solver.
//!
//! Mixed-potential EFIE with rooftop bases and Galerkin testing:
//!
//! ```text
//! Z[m][n] = jωμ ∫∫ Λm Λn (tm·tn) G  +  1/(jωε) ∫∫ Λm' Λn' G
//! ```
//!
//! The perfectly conducting ground plane at z = 0 is replaced by image
//! segments whose horizontal current is reversed. Since a geometric mirror
//! flips only the vertical tangent component, every image contribution is
//! the free-space term with the mirrored segment, negated.

mod kernel;
pub mod quadrature;

use std::f64::consts::PI;
use std::fmt::Write as _;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mesh_wire, EndCondition, SegmentMesh, WireGeometry};
use crate::{EPSILON_0, MU_0, SPEED_OF_LIGHT};

pub use kernel::{mirror, mirror_segment, pair_moments, source_line_integrals, PairMoments};

/// Condition estimates above this are recorded as ill-conditioned.
pub const CONDITION_WARN: f64 = 1e12;
/// Condition estimates above this are rejected as singular.
pub const CONDITION_FAIL: f64 = 1e15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub frequency: f64,
    pub source_voltage: f64,
    pub ground_plane: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { frequency: 1e9, source_voltage: 1.0, ground_plane: true }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(Error::Config(format!("frequency {} must be positive", self.frequency)));
        }
        if self.source_voltage == 0.0 || !self.source_voltage.is_finite() {
            return Err(Error::Config("source voltage must be finite and non-zero".into()));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    pub fn wavenumber(&self) -> f64 {
        self.omega() / SPEED_OF_LIGHT
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentSolution {
    pub geometry_id: String,
    /// Rooftop amplitudes (amperes), one per basis function.
    pub coefficients: Vec<Complex64>,
    pub mesh: SegmentMesh,
    pub input_impedance: Complex64,
    /// 1-norm condition estimate of the impedance matrix.
    pub condition: f64,
    pub ill_conditioned: bool,
}

impl CurrentSolution {
    /// Current at the start and end of every segment.
    pub fn segment_currents(&self) -> Vec<(Complex64, Complex64)> {
        let mesh = &self.mesh;
        let n = mesh.segments.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut node_current = vec![zero; n + 1];
        for (basis, &c) in self.coefficients.iter().enumerate() {
            node_current[mesh.node_of_basis(basis)] = c;
        }
        if mesh.endpoint_condition == EndCondition::Periodic {
            node_current[n] = node_current[0];
        }
        (0..n).map(|j| (node_current[j], node_current[j + 1])).collect()
    }
}

/// Galerkin impedance matrix, exactly symmetric by construction.
pub fn assemble_impedance_matrix(mesh: &SegmentMesh, config: &SolveConfig) -> DMatrix<Complex64> {
    let k = config.wavenumber();
    let omega = config.omega();
    let segs = &mesh.segments;
    let n_seg = segs.len();

    // Upper-triangle segment pairs; the lower triangle is the transpose.
    let rows: Vec<Vec<SegmentCoupling>> = (0..n_seg)
        .into_par_iter()
        .map(|p| {
            (p..n_seg)
                .map(|q| {
                    let direct = pair_moments(&segs[p], &segs[q], k, mesh.radius);
                    let direct = if p == q { symmetrized(direct) } else { direct };
                    let image = config.ground_plane.then(|| {
                        let img = mirror_segment(&segs[q]);
                        (pair_moments(&segs[p], &img, k, mesh.radius), segs[p].tangent.dot(&img.tangent))
                    });
                    SegmentCoupling { direct, image }
                })
                .collect()
        })
        .collect();

    let coupling = |p: usize, q: usize, i: usize, j: usize| -> (Complex64, Complex64) {
        // Returns (vector-potential moment, scalar-potential total).
        let (c, i, j) = if p <= q { (&rows[p][q - p], i, j) } else { (&rows[q][p - q], j, i) };
        let dot = segs[p].tangent.dot(&segs[q].tangent);
        let mut vector = c.direct[i][j] * dot;
        let mut scalar: Complex64 = c.direct.iter().flatten().sum();
        if let Some((img, img_dot)) = &c.image {
            vector -= img[i][j] * *img_dot;
            scalar -= img.iter().flatten().sum::<Complex64>();
        }
        (vector, scalar)
    };

    let jwmu = Complex64::new(0.0, omega * MU_0);
    let inv_jweps = Complex64::new(0.0, -1.0 / (omega * EPSILON_0));
    let nb = mesh.basis_count;
    let supports: Vec<[(usize, usize, f64); 2]> = (0..nb)
        .map(|b| {
            let (rise, fall) = mesh.basis_support(b);
            // (segment, shape index, derivative)
            [(rise, 0, 1.0 / segs[rise].length), (fall, 1, -1.0 / segs[fall].length)]
        })
        .collect();

    let mut z = DMatrix::from_element(nb, nb, Complex64::new(0.0, 0.0));
    for m in 0..nb {
        for n in m..nb {
            let mut sum = Complex64::new(0.0, 0.0);
            for &(p, i, dp) in &supports[m] {
                for &(q, j, dq) in &supports[n] {
                    let (vector, scalar) = coupling(p, q, i, j);
                    sum += jwmu * vector + inv_jweps * scalar * (dp * dq);
                }
            }
            z[(m, n)] = sum;
            z[(n, m)] = sum;
        }
    }
    z
}

struct SegmentCoupling {
    direct: PairMoments,
    image: Option<(PairMoments, f64)>,
}

fn symmetrized(m: PairMoments) -> PairMoments {
    let off = (m[0][1] + m[1][0]) * 0.5;
    [[m[0][0], off], [off, m[1][1]]]
}

/// Delta-gap excitation: zero except `source_voltage` at the source basis.
pub fn excitation_vector(mesh: &SegmentMesh, config: &SolveConfig) -> DVector<Complex64> {
    let mut v = DVector::from_element(mesh.basis_count, Complex64::new(0.0, 0.0));
    v[mesh.source_basis] = Complex64::new(config.source_voltage, 0.0);
    v
}

/// Dense LU solve with partial pivoting.
pub fn solve_currents(
    z: &DMatrix<Complex64>,
    mesh: &SegmentMesh,
    config: &SolveConfig,
) -> Result<CurrentSolution> {
    config.validate()?;
    let v = excitation_vector(mesh, config);
    let n = z.nrows();
    let lu = z.clone().lu();
    let identity = DMatrix::<Complex64>::identity(n, n);
    let inverse = lu.solve(&identity);
    let condition = match &inverse {
        Some(inv) => one_norm(z) * one_norm(inv),
        None => f64::INFINITY,
    };
    if !condition.is_finite() || condition > CONDITION_FAIL {
        return Err(Error::SingularMatrix { condition });
    }
    let ill_conditioned = condition > CONDITION_WARN;
    if ill_conditioned {
        warn!("{}: impedance matrix condition estimate {condition:e}", mesh.geometry_id);
    }
    let coefficients = lu.solve(&v).ok_or(Error::SingularMatrix { condition })?;
    if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::SingularMatrix { condition });
    }
    let gap_current = coefficients[mesh.source_basis];
    Ok(CurrentSolution {
        geometry_id: mesh.geometry_id.clone(),
        coefficients: coefficients.iter().copied().collect(),
        mesh: mesh.clone(),
        input_impedance: Complex64::new(config.source_voltage, 0.0) / gap_current,
        condition,
        ill_conditioned,
    })
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Mesh, assemble and solve one geometry.
pub fn solve_geometry(geometry: &WireGeometry, config: &SolveConfig) -> Result<CurrentSolution> {
    config.validate()?;
    let mesh = mesh_wire(geometry, config.frequency)?;
    let z = assemble_impedance_matrix(&mesh, config);
    solve_currents(&z, &mesh, config)
}

/// Plain-text dump of `Z`, `V` and `I` for offline inspection. Each complex
/// entry is written as `re,im`; rows are newline separated.
pub fn debug_dump(z: &DMatrix<Complex64>, solution: &CurrentSolution, config: &SolveConfig) -> String {
    let v = excitation_vector(&solution.mesh, config);
    let fmt = |c: &Complex64| format!("{:e},{:e}", c.re, c.im);
    let mut out = String::new();
    let _ = writeln!(out, "# shape {}", solution.geometry_id);
    let _ = writeln!(out, "# frequency {:e} ground_plane {}", config.frequency, config.ground_plane);
    let _ = writeln!(out, "Z {} {}", z.nrows(), z.ncols());
    for row in z.row_iter() {
        let cells: Vec<String> = row.iter().map(fmt).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    let _ = writeln!(out, "V {}", v.len());
    let cells: Vec<String> = v.iter().map(fmt).collect();
    let _ = writeln!(out, "{}", cells.join(" "));
    let _ = writeln!(out, "I {}", solution.coefficients.len());
    let cells: Vec<String> = solution.coefficients.iter().map(fmt).collect();
    let _ = writeln!(out, "{}", cells.join(" "));
    out
}
