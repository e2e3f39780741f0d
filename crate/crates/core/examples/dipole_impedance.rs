//! Input impedance of a centre-fed thin dipole, in free space and over the
//! ground plane, at several mesh densities.

use nalgebra::Vector3;
use nfscan::geometry::{mesh_wire_refined, Placement, WireGeometry};
use nfscan::mom::{assemble_impedance_matrix, solve_currents, SolveConfig};

fn main() -> Result<(), nfscan::Error> {
    let cfg = SolveConfig { frequency: 1e9, source_voltage: 1.0, ground_plane: false };
    let lambda = cfg.wavelength();
    let length = 0.47 * lambda;
    for (height, ground) in [(1.0, false), (10.0 * lambda, true), (0.25 * lambda, true)] {
        let v = vec![Vector3::new(-length / 2.0, 0.0, height), Vector3::new(length / 2.0, 0.0, height)];
        let g = WireGeometry::new("dipole", v, false, lambda / 1000.0, Placement::Middle, 0)?;
        let cfg = SolveConfig { ground_plane: ground, ..cfg.clone() };
        for refinement in 1..=3 {
            let mesh = mesh_wire_refined(&g, cfg.frequency, refinement)?;
            let z = assemble_impedance_matrix(&mesh, &cfg);
            let sol = solve_currents(&z, &mesh, &cfg)?;
            let zin = sol.input_impedance;
            println!(
                "h = {height:6.3} m ground = {ground:5}  segments {:3}  Z = {:7.2} {:+7.2}j ohm  cond {:.1e}",
                mesh.segments.len(),
                zin.re,
                zin.im,
                sol.condition
            );
        }
    }
    Ok(())
}
