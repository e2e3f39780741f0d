use std::collections::BTreeMap;
use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::raster::{downsample_antialiased, render_grayscale, IMAGE_SIDE};
use crate::error::{Error, Result};
use crate::field::{compute_field_map, field_magnitude_db, Combine, FieldKind, ProbeGrid};
use crate::geometry::WireGeometry;
use crate::mom::{solve_geometry, SolveConfig};

pub const PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;
pub const DATASET_MAGIC: &[u8; 8] = b"NFSCANDS";
pub const DATASET_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Synthetic,
    Ingested,
}

/// A 100×100 training image in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanImage {
    pub shape_id: String,
    pub pixels: Vec<f32>,
    pub label: u8,
    pub provenance: Provenance,
}

impl ScanImage {
    pub fn features(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| p as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub probe_kind: FieldKind,
    pub images: Vec<ScanImage>,
    /// Ordered key/value record of everything that produced the images.
    pub manifest: BTreeMap<String, String>,
}

impl Dataset {
    pub fn new(probe_kind: FieldKind, images: Vec<ScanImage>) -> Result<Self> {
        let mut seen = HashSet::new();
        for img in &images {
            if img.pixels.len() != PIXELS {
                return Err(Error::Training(format!(
                    "image `{}` has {} pixels, expected {PIXELS}",
                    img.shape_id,
                    img.pixels.len()
                )));
            }
            if img.label > 1 {
                return Err(Error::Training(format!("image `{}` has label {}", img.shape_id, img.label)));
            }
            if !seen.insert(img.shape_id.as_str()) {
                return Err(Error::Training(format!("duplicate shape id `{}`", img.shape_id)));
            }
        }
        Ok(Dataset { probe_kind, images, manifest: BTreeMap::new() })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.images.iter().map(|i| i.label).collect()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.images.iter().filter(|i| i.label == 1).count();
        [self.images.len() - ones, ones]
    }

    /// `n × 10 000` row-major feature matrix.
    pub fn feature_matrix(&self) -> crate::classifiers::Features {
        let mut data = Vec::with_capacity(self.len() * PIXELS);
        for img in &self.images {
            data.extend(img.pixels.iter().map(|&p| p as f64));
        }
        crate::classifiers::Features::new(self.len(), PIXELS, data)
    }

    /// Binary layout: magic, version (u32), probe kind (`b'E'`/`b'H'`),
    /// image count (u32), then per image the id (u16 length + UTF-8), the
    /// label (u8) and 10 000 little-endian f32 pixels.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(17 + self.len() * (PIXELS * 4 + 32));
        out.extend_from_slice(DATASET_MAGIC);
        out.extend_from_slice(&DATASET_VERSION.to_le_bytes());
        out.push(self.probe_kind.as_str().as_bytes()[0]);
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        for img in &self.images {
            let id = img.shape_id.as_bytes();
            out.extend_from_slice(&(id.len() as u16).to_le_bytes());
            out.extend_from_slice(id);
            out.push(img.label);
            for p in &img.pixels {
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |why: &str| Error::format(path, why.to_string());
        let mut cursor = Reader { bytes, at: 0 };
        if cursor.take(8).ok_or_else(|| bad("truncated header"))? != DATASET_MAGIC {
            return Err(bad("bad magic bytes (not an nfscan dataset)"));
        }
        let version = cursor.u32().ok_or_else(|| bad("truncated header"))?;
        if version != DATASET_VERSION {
            return Err(bad(&format!("unsupported dataset version {version}")));
        }
        let kind = match cursor.take(1).ok_or_else(|| bad("truncated header"))?[0] {
            b'E' => FieldKind::E,
            b'H' => FieldKind::H,
            other => return Err(bad(&format!("unknown probe kind byte {other:#x}"))),
        };
        let count = cursor.u32().ok_or_else(|| bad("truncated header"))? as usize;
        let mut images = Vec::with_capacity(count);
        for i in 0..count {
            let truncated = || bad(&format!("truncated at image {i}"));
            let len = cursor.u16().ok_or_else(truncated)? as usize;
            let id = std::str::from_utf8(cursor.take(len).ok_or_else(truncated)?)
                .map_err(|_| bad("shape id is not UTF-8"))?
                .to_string();
            let label = cursor.take(1).ok_or_else(truncated)?[0];
            let raw = cursor.take(PIXELS * 4).ok_or_else(truncated)?;
            let pixels: Vec<f32> = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            if pixels.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(bad(&format!("image `{id}` has pixels outside [0, 1]")));
            }
            images.push(ScanImage { shape_id: id, pixels, label, provenance: Provenance::Synthetic });
        }
        if cursor.at != bytes.len() {
            return Err(bad("trailing bytes after last image"));
        }
        Dataset::new(kind, images).map_err(|e| bad(&e.to_string()))
    }

    pub fn manifest_text(&self) -> String {
        let mut out = String::from("# nfscan dataset manifest v1\n");
        for (k, v) in &self.manifest {
            out.push_str(&format!("{k} = {v}\n"));
        }
        let [c0, c1] = self.class_counts();
        out.push_str(&format!("class_counts = {c0},{c1}\n"));
        out
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let slice = self.bytes.get(self.at..self.at + n)?;
        self.at += n;
        Some(slice)
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Knobs of the geometry → image pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImagingConfig {
    pub solve: SolveConfig,
    pub grid: ProbeGrid,
    pub combine: Combine,
}

impl Default for ImagingConfig {
    fn default() -> Self {
        ImagingConfig { solve: SolveConfig::default(), grid: ProbeGrid::default(), combine: Combine::Total }
    }
}

/// dB map → grayscale render → anti-aliased 100×100 pixels.
pub fn image_from_db(db: &crate::field::RealGrid) -> Result<Vec<f32>> {
    let raster = render_grayscale(db)?;
    let small = downsample_antialiased(&raster);
    Ok(small.values.iter().map(|&v| v as f32).collect())
}

/// Runs one shape through mesh → solve → field → image for each probe kind,
/// solving the currents only once.
pub fn shape_images(
    geometry: &WireGeometry,
    kinds: &[FieldKind],
    config: &ImagingConfig,
) -> Result<Vec<ScanImage>> {
    let wrap = |e: Error| Error::Shape { id: geometry.id.clone(), source: Box::new(e) };
    let solution = solve_geometry(geometry, &config.solve).map_err(wrap)?;
    kinds
        .iter()
        .map(|&kind| {
            let map = compute_field_map(&solution, &config.grid, kind, &config.solve)?;
            let db = field_magnitude_db(&map, config.combine)?;
            Ok(ScanImage {
                shape_id: geometry.id.clone(),
                pixels: image_from_db(&db)?,
                label: geometry.label,
                provenance: Provenance::Synthetic,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(wrap)
}

/// One dataset per requested probe kind, images in library order.
pub fn build_datasets(
    library: &[WireGeometry],
    kinds: &[FieldKind],
    config: &ImagingConfig,
) -> Result<Vec<Dataset>> {
    let per_shape: Vec<Vec<ScanImage>> = library
        .par_iter()
        .map(|g| shape_images(g, kinds, config))
        .collect::<Result<_>>()?;
    kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let images = per_shape.iter().map(|imgs| imgs[k].clone()).collect();
            let mut dataset = Dataset::new(kind, images)?;
            dataset.manifest = imaging_manifest(config, kind);
            Ok(dataset)
        })
        .collect()
}

pub fn build_dataset(
    library: &[WireGeometry],
    probe_kind: FieldKind,
    config: &ImagingConfig,
) -> Result<Dataset> {
    Ok(build_datasets(library, &[probe_kind], config)?.remove(0))
}

fn imaging_manifest(config: &ImagingConfig, kind: FieldKind) -> BTreeMap<String, String> {
    let g = &config.grid;
    [
        ("pipeline_version", crate::PIPELINE_VERSION.to_string()),
        ("probe_kind", kind.as_str().to_string()),
        ("frequency_hz", format!("{:?}", config.solve.frequency)),
        ("source_voltage", format!("{:?}", config.solve.source_voltage)),
        ("ground_plane", config.solve.ground_plane.to_string()),
        ("combine", config.combine.as_str().to_string()),
        (
            "probe_grid",
            format!(
                "nx={} ny={} x_min={:?} y_min={:?} extent_x={:?} extent_y={:?} z={:?}",
                g.nx, g.ny, g.x_min, g.y_min, g.extent_x, g.extent_y, g.plane_height
            ),
        ),
        ("render_factor", super::raster::RENDER_FACTOR.to_string()),
        ("image_side", IMAGE_SIDE.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}
