//! dB maps to 100×100 grayscale training images; dataset persistence and
//! ingestion of externally measured scans.

mod dataset;
mod ingest;
mod png_io;
mod raster;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use dataset::{
    build_dataset, build_datasets, image_from_db, shape_images, Dataset, ImagingConfig,
    Provenance, ScanImage, DATASET_MAGIC, DATASET_VERSION, PIXELS,
};
pub use ingest::{ingest_external, load_raster, parse_label_manifest};
pub use png_io::{read_png_gray, tile_gallery, write_png16, write_png8};
pub use raster::{
    bilinear, downsample_antialiased, gaussian_blur, gaussian_kernel, render_grayscale,
    resize_antialiased, upsample_bilinear, IMAGE_SIDE, RENDER_FACTOR, SIGMA_PER_FACTOR,
};

use crate::error::Result;
use crate::field::{write_grid_text, GridText, GridUnits, RealGrid};

impl ScanImage {
    pub fn to_grid(&self) -> RealGrid {
        RealGrid::new(IMAGE_SIDE, IMAGE_SIDE, self.pixels.iter().map(|&p| p as f64).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RasterFormat {
    /// 16-bit grayscale PNG (quantized to 1/65535).
    Png16,
    /// Text grid with exact decimal values.
    Grid,
}

/// Writes every image of `dataset` into `dir` plus a `labels.csv` manifest
/// accepted by [`ingest_external`]. Returns the raster paths.
pub fn export_rasters(dataset: &Dataset, dir: &Path, format: RasterFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut labels = String::from("# filename,label\n");
    let mut paths = Vec::with_capacity(dataset.len());
    for img in &dataset.images {
        let (name, path) = match format {
            RasterFormat::Png16 => {
                let name = format!("{}.png", img.shape_id);
                let path = dir.join(&name);
                write_png16(&path, &img.to_grid())?;
                (name, path)
            }
            RasterFormat::Grid => {
                let name = format!("{}.grid", img.shape_id);
                let path = dir.join(&name);
                let text = write_grid_text(&GridText {
                    shape: img.shape_id.clone(),
                    kind: Some(dataset.probe_kind),
                    combine: None,
                    units: GridUnits::Unit,
                    probes: None,
                    data: img.to_grid(),
                });
                std::fs::write(&path, text)?;
                (name, path)
            }
        };
        let _ = writeln!(labels, "{name},{}", img.label);
        paths.push(path);
    }
    std::fs::write(dir.join("labels.csv"), labels)?;
    Ok(paths)
}
