//! Exports a dataset as 16-bit PNGs with a label manifest, then ingests the
//! files back, the same path external measured scans take.

use nfscan::field::FieldKind;
use nfscan::geometry::{generate_wire_library, LibraryConfig};
use nfscan::imaging::{build_dataset, export_rasters, ingest_external, ImagingConfig, RasterFormat};

fn main() -> Result<(), nfscan::Error> {
    let library = generate_wire_library(&LibraryConfig::default(), 1)?;
    let data = build_dataset(&library[..8], FieldKind::E, &ImagingConfig::default())?;
    let dir = std::env::temp_dir().join("nfscan_ingest");
    let files = export_rasters(&data, &dir, RasterFormat::Png16)?;
    println!("exported {} rasters to {}", files.len(), dir.display());

    let back = ingest_external(&files, &dir.join("labels.csv"), FieldKind::E)?;
    for (a, b) in data.images.iter().zip(&back.images) {
        let worst = a.pixels.iter().zip(&b.pixels).map(|(p, q)| (p - q).abs()).fold(0.0f32, f32::max);
        println!("{:<12} label {}  max pixel difference {worst:.2e}", b.shape_id, b.label);
    }
    println!("{}", back.manifest_text());
    Ok(())
}
