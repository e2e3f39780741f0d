use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::dataset::{Dataset, Provenance, ScanImage};
use super::png_io::read_png_gray;
use super::raster::{resize_antialiased, IMAGE_SIDE};
use crate::error::{Error, Result};
use crate::field::{parse_grid_text, FieldKind, GridUnits, RealGrid, DB_FLOOR};

/// Parses a `filename,label` manifest. Blank lines and `#` comments are
/// skipped.
pub fn parse_label_manifest(text: &str, path: &Path) -> Result<BTreeMap<String, u8>> {
    let mut labels = BTreeMap::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: &str| Error::format(path, format!("line {}: {why}", number + 1));
        let (name, label) = line.rsplit_once(',').ok_or_else(|| bad("expected `filename,label`"))?;
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(&format!("label `{other}` is not 0 or 1"))),
        };
        if labels.insert(name.trim().to_string(), label).is_some() {
            return Err(bad(&format!("`{}` listed twice", name.trim())));
        }
    }
    Ok(labels)
}

/// Loads a raster as `[0, 1]` intensities: PNG samples are divided by their
/// bit-depth maximum, `.grid` text files in dB are mapped affinely from
/// `[-60, 0]`.
pub fn load_raster(path: &Path) -> Result<RealGrid> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "png" => read_png_gray(path),
        "grid" => {
            let text = std::fs::read_to_string(path)?;
            let grid = parse_grid_text(&text, path)?;
            let (lo, hi) = match grid.units {
                GridUnits::Db => (DB_FLOOR, 0.0),
                GridUnits::Unit => (0.0, 1.0),
            };
            if let Some(v) = grid.data.values.iter().find(|v| !(lo..=hi).contains(*v)) {
                return Err(Error::format(path, format!("value {v} outside [{lo}, {hi}]")));
            }
            let values = grid.data.values.iter().map(|v| (v - lo) / (hi - lo)).collect();
            Ok(RealGrid::new(grid.data.rows, grid.data.cols, values))
        }
        other => Err(Error::format(path, format!("unsupported raster extension `{other}`"))),
    }
}

/// Builds a dataset from externally produced rasters. Every file must be
/// named in the label manifest and every manifest entry must have a file;
/// all problems are collected into one [`Error::Ingest`].
pub fn ingest_external(
    files: &[PathBuf],
    labels_path: &Path,
    probe_kind: FieldKind,
) -> Result<Dataset> {
    let labels = parse_label_manifest(&std::fs::read_to_string(labels_path)?, labels_path)?;
    let mut failures = Vec::new();
    let mut images = Vec::new();
    let mut used = std::collections::BTreeSet::new();
    for file in files {
        let name = file.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        let Some(&label) = labels.get(&name) else {
            failures.push((name, "no label in manifest".to_string()));
            continue;
        };
        used.insert(name.clone());
        match load_raster(file) {
            Ok(raster) => {
                let small = resize_antialiased(&raster, IMAGE_SIDE, IMAGE_SIDE);
                let shape_id = file
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or(&name)
                    .to_string();
                images.push(ScanImage {
                    shape_id,
                    pixels: small.values.iter().map(|&v| v as f32).collect(),
                    label,
                    provenance: Provenance::Ingested,
                });
            }
            Err(e) => failures.push((name, e.to_string())),
        }
    }
    for name in labels.keys().filter(|n| !used.contains(*n)) {
        failures.push((name.clone(), "listed in manifest but no such file".to_string()));
    }
    if !failures.is_empty() {
        return Err(Error::Ingest(failures));
    }
    let mut dataset = Dataset::new(probe_kind, images)?;
    dataset.manifest.insert("pipeline_version".into(), crate::PIPELINE_VERSION.into());
    dataset.manifest.insert("provenance".into(), "ingested".into());
    dataset.manifest.insert("probe_kind".into(), probe_kind.as_str().into());
    dataset.manifest.insert("label_manifest".into(), labels_path.display().to_string());
    Ok(dataset)
}
