//! Solves one library shape and writes its E and H scans (every component)
//! as PNG images and dB grids.
//!
//!     cargo run --release --example near_field_scan -- [shape-id] [out-dir]

use std::path::PathBuf;

use nfscan::field::{compute_field_map, field_magnitude_db, Combine, FieldKind, ProbeGrid};
use nfscan::geometry::{generate_wire_library, LibraryConfig};
use nfscan::imaging::{image_from_db, write_png8, IMAGE_SIDE};
use nfscan::mom::{solve_geometry, SolveConfig};

fn main() -> Result<(), nfscan::Error> {
    let mut args = std::env::args().skip(1);
    let library = generate_wire_library(&LibraryConfig::default(), 0)?;
    let id = args.next().unwrap_or_else(|| library[0].id.clone());
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/scan".into()));
    std::fs::create_dir_all(&out)?;
    let g = library.iter().find(|g| g.id == id).ok_or_else(|| nfscan::Error::UnknownShape(id.clone()))?;

    let cfg = SolveConfig::default();
    let sol = solve_geometry(g, &cfg)?;
    println!("{}: {} bases, Z_in = {:.2}", g.id, sol.coefficients.len(), sol.input_impedance);
    let grid = ProbeGrid::default();
    for kind in [FieldKind::E, FieldKind::H] {
        let map = compute_field_map(&sol, &grid, kind, &cfg)?;
        for combine in Combine::ALL {
            let db = field_magnitude_db(&map, combine)?;
            let floor = db.values.iter().copied().fold(0.0, f64::min);
            let pixels = image_from_db(&db)?;
            let img = nfscan::field::RealGrid::new(IMAGE_SIDE, IMAGE_SIDE, pixels.iter().map(|&p| p as f64).collect());
            let path = out.join(format!("{}_{}_{}.png", g.id, kind.as_str(), combine.as_str()));
            write_png8(&path, &img)?;
            println!("  {} {:<5} min {floor:6.1} dB -> {}", kind.as_str(), combine.as_str(), path.display());
        }
    }
    Ok(())
}
