//! Builds the magnetic and electric image datasets for one library seed,
//! saves them and prints per-class pixel statistics.

use std::path::Path;

use nfscan::field::FieldKind;
use nfscan::geometry::{generate_wire_library, LibraryConfig};
use nfscan::imaging::{build_datasets, tile_gallery, write_png8, ImagingConfig};

fn main() -> Result<(), nfscan::Error> {
    let out = Path::new("out/dataset");
    std::fs::create_dir_all(out)?;
    let library = generate_wire_library(&LibraryConfig::default(), 0)?;
    let start = std::time::Instant::now();
    let datasets = build_datasets(&library, &[FieldKind::H, FieldKind::E], &ImagingConfig::default())?;
    println!("imaged {} shapes in {:.1} s", library.len(), start.elapsed().as_secs_f64());
    for d in &datasets {
        let kind = d.probe_kind.as_str();
        for label in [0u8, 1] {
            let imgs: Vec<_> = d.images.iter().filter(|i| i.label == label).collect();
            let mean = imgs.iter().flat_map(|i| &i.pixels).map(|&p| p as f64).sum::<f64>() / (imgs.len() * 10_000) as f64;
            println!("{kind} label {label}: {} images, mean intensity {mean:.3}", imgs.len());
            let tiles: Vec<_> = imgs.iter().map(|i| i.to_grid()).collect();
            write_png8(&out.join(format!("gallery_{kind}_{label}.png")), &tile_gallery(&tiles, 8))?;
        }
        let path = out.join(format!("dataset_{}.nfds", kind.to_ascii_lowercase()));
        std::fs::write(&path, d.to_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
