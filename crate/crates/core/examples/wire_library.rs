//! Generates the 64-shape wire library and meshes every shape.
//!
//!     cargo run --release --example wire_library -- [seed]

use nfscan::geometry::{generate_wire_library, mesh_wire, write_library_manifest, LibraryConfig};

fn main() -> Result<(), nfscan::Error> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let library = generate_wire_library(&LibraryConfig::default(), seed)?;
    println!("{:<12} {:>6} {:>5} {:>9} {:>8} {:>6}", "id", "label", "edges", "length_m", "feed", "bases");
    for g in &library {
        let mesh = mesh_wire(g, 1e9)?;
        println!(
            "{:<12} {:>6} {:>5} {:>9.4} {:>8} {:>6}",
            g.id,
            if g.closed { "closed" } else { "open" },
            g.edge_count(),
            g.path_length(),
            g.placement.as_str(),
            mesh.basis_count
        );
    }
    let manifest = write_library_manifest(&library);
    println!("\nmanifest: {} lines", manifest.lines().count());
    Ok(())
}
