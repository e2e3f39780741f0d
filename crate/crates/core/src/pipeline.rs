//! Run configuration and the commands behind the `nfscan` binary.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::error::{Error, Result};
use crate::evaluation::{
    build_report_table, evaluate_classifier, parse_report_csv, write_fold_log, write_report_csv, EvaluationReport,
    ReportTable,
};
use crate::field::{compute_field_map, field_magnitude_db, write_grid_text, Combine, FieldKind, GridText, GridUnits};
use crate::geometry::{generate_wire_library, write_library_manifest, LibraryConfig, WireGeometry};
use crate::imaging::{
    build_datasets, image_from_db, ingest_external, tile_gallery, write_png8, Dataset, ImagingConfig, IMAGE_SIDE,
};
use crate::mom::solve_geometry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 lets the thread pool decide.
    pub jobs: usize,
    /// Write wall-clock seconds into reports. Off keeps reruns byte-identical.
    pub record_timing: bool,
    pub probes: Vec<String>,
    pub classifiers: Vec<String>,
    pub library: LibraryConfig,
    pub imaging: ImagingConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            jobs: 0,
            record_timing: false,
            probes: vec!["h".into(), "e".into()],
            classifiers: ClassifierKind::ALL.iter().map(|k| k.key().to_string()).collect(),
            library: LibraryConfig::default(),
            imaging: ImagingConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub probe: Option<FieldKind>,
    pub classifier: Option<ClassifierKind>,
    pub combine: Option<Combine>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = o.probe {
            self.probes = vec![p.as_str().to_ascii_lowercase()];
        }
        if let Some(c) = o.classifier {
            self.classifiers = vec![c.key().to_string()];
        }
        if let Some(c) = o.combine {
            self.imaging.combine = c;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(j) = o.jobs {
            self.jobs = j;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.library.validate()?;
        self.imaging.solve.validate()?;
        self.imaging.grid.validate()?;
        self.probe_kinds()?;
        self.classifier_kinds()?;
        Ok(())
    }

    pub fn probe_kinds(&self) -> Result<Vec<FieldKind>> {
        if self.probes.is_empty() {
            return Err(Error::Config("at least one probe kind is required".into()));
        }
        let mut kinds = Vec::new();
        for p in &self.probes {
            let k = FieldKind::parse(p).ok_or_else(|| Error::Config(format!("unknown probe kind `{p}` (use e or h)")))?;
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
        Ok(kinds)
    }

    pub fn classifier_kinds(&self) -> Result<Vec<ClassifierKind>> {
        if self.classifiers.is_empty() {
            return Err(Error::Config("at least one classifier is required".into()));
        }
        let mut kinds = Vec::new();
        for c in &self.classifiers {
            let k = ClassifierKind::parse(c).ok_or_else(|| Error::Config(format!("unknown classifier `{c}`")))?;
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
        Ok(kinds)
    }
}

/// Process exit status for an error: 2 configuration, 3 solver, 4 data
/// format, 1 anything else.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => 2,
        Error::Geometry { .. } | Error::Mesh { .. } | Error::SingularMatrix { .. } | Error::ProbeInsideWire { .. } => 3,
        Error::Shape { source, .. } => exit_code(source),
        Error::Format { .. } | Error::Ingest(_) => 4,
        _ => 1,
    }
}

/// Runs `f` on a thread pool of `jobs` workers (0 = default size).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

/// Resolved configuration written beside the artifacts it produced.
pub const CONFIG_FILE: &str = "config.toml";

fn write_config(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(cfg.out.join(CONFIG_FILE), cfg.to_toml_string())?;
    Ok(())
}

pub fn dataset_path(out: &Path, kind: FieldKind) -> PathBuf {
    out.join(format!("dataset_{}.nfds", kind.as_str().to_ascii_lowercase()))
}

fn write_dataset(out: &Path, dataset: &Dataset) -> Result<PathBuf> {
    let path = dataset_path(out, dataset.probe_kind);
    std::fs::write(&path, dataset.to_bytes())?;
    std::fs::write(path.with_extension("manifest"), dataset.manifest_text())?;
    Ok(path)
}

pub fn load_dataset(out: &Path, kind: FieldKind) -> Result<Dataset> {
    let path = dataset_path(out, kind);
    let bytes = std::fs::read(&path)
        .map_err(|e| Error::format(&path, format!("cannot read dataset ({e}); run `generate` or `ingest` first")))?;
    Dataset::from_bytes(&bytes, &path)
}

/// Builds the wire library and one image dataset per probe kind, plus
/// manifests and per-class image galleries.
pub fn generate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let out = &cfg.out;
    write_config(cfg)?;
    let library = generate_wire_library(&cfg.library, cfg.seed)?;
    let mut written = vec![out.join("library.txt")];
    std::fs::write(&written[0], write_library_manifest(&library))?;
    let kinds = cfg.probe_kinds()?;
    log::info!("imaging {} shapes for {} probe kind(s)", library.len(), kinds.len());
    for mut dataset in build_datasets(&library, &kinds, &cfg.imaging)? {
        dataset.manifest.insert("seed".into(), cfg.seed.to_string());
        dataset.manifest.insert("shapes".into(), library.len().to_string());
        written.push(write_dataset(out, &dataset)?);
        let kind = dataset.probe_kind.as_str().to_ascii_lowercase();
        for (label, class) in [(0u8, "closed"), (1u8, "open")] {
            let tiles: Vec<_> = dataset.images.iter().filter(|i| i.label == label).map(|i| i.to_grid()).collect();
            let path = out.join(format!("gallery_{kind}_{class}.png"));
            write_png8(&path, &tile_gallery(&tiles, 8))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Leave-one-out evaluation of every configured classifier on every
/// configured probe kind. Writes `results.csv`, per-run fold logs and the
/// summary table.
pub fn evaluate(cfg: &RunConfig) -> Result<Vec<EvaluationReport>> {
    let out = &cfg.out;
    let folds_dir = out.join("folds");
    std::fs::create_dir_all(&folds_dir)?;
    write_config(cfg)?;
    let mut reports = Vec::new();
    for kind in cfg.probe_kinds()? {
        let dataset = load_dataset(out, kind)?;
        for ck in cfg.classifier_kinds()? {
            log::info!("evaluating {} on {} ({} samples)", ck.name(), kind.as_str(), dataset.len());
            let spec = ClassifierSpec::new(ck).with_seed(cfg.seed);
            let report = evaluate_classifier(&spec, &dataset, cfg.record_timing)?;
            let log_path = folds_dir.join(format!("{}_{}.csv", ck.key(), kind.as_str().to_ascii_lowercase()));
            std::fs::write(log_path, write_fold_log(&report.folds))?;
            log::info!("{} {}: F1 {:.3}", ck.name(), kind.as_str(), report.f1);
            reports.push(report);
        }
    }
    std::fs::write(out.join("results.csv"), write_report_csv(&reports))?;
    write_table(out, &build_report_table(&reports)?)?;
    Ok(reports)
}

fn write_table(out: &Path, table: &ReportTable) -> Result<()> {
    std::fs::write(out.join("table.txt"), table.to_text())?;
    std::fs::write(out.join("table.csv"), table.to_csv())?;
    Ok(())
}

/// Renders every field component of one shape: processed 100×100 PNGs and
/// the raw probe-grid dB maps.
pub fn render(cfg: &RunConfig, shape: Option<&str>) -> Result<Vec<PathBuf>> {
    let library = generate_wire_library(&cfg.library, cfg.seed)?;
    let geometry: &WireGeometry = match shape {
        None => &library[0],
        Some(id) => library.iter().find(|g| g.id == id).ok_or_else(|| Error::UnknownShape(id.to_string()))?,
    };
    let dir = cfg.out.join("render");
    std::fs::create_dir_all(&dir)?;
    write_config(cfg)?;
    let solve = &cfg.imaging.solve;
    let wrap = |e: Error| Error::Shape { id: geometry.id.clone(), source: Box::new(e) };
    let solution = solve_geometry(geometry, solve).map_err(wrap)?;
    let mut written = Vec::new();
    for kind in [FieldKind::E, FieldKind::H] {
        let map = compute_field_map(&solution, &cfg.imaging.grid, kind, solve).map_err(wrap)?;
        for combine in Combine::ALL {
            let db = field_magnitude_db(&map, combine).map_err(wrap)?;
            let stem = format!("{}_{}_{}", geometry.id, kind.as_str(), combine.as_str());
            let pixels = image_from_db(&db)?;
            let img = crate::field::RealGrid::new(IMAGE_SIDE, IMAGE_SIDE, pixels.iter().map(|&p| p as f64).collect());
            let png = dir.join(format!("{stem}.png"));
            write_png8(&png, &img)?;
            let grid = dir.join(format!("{stem}.grid"));
            let text = write_grid_text(&GridText {
                shape: geometry.id.clone(),
                kind: Some(kind),
                combine: Some(combine),
                units: GridUnits::Db,
                probes: Some(cfg.imaging.grid.clone()),
                data: db,
            });
            std::fs::write(&grid, text)?;
            written.push(png);
            written.push(grid);
        }
    }
    Ok(written)
}

/// Turns labeled external rasters into a dataset for `probe`.
pub fn ingest(cfg: &RunConfig, files: &[PathBuf], labels: &Path, probe: FieldKind) -> Result<PathBuf> {
    let dataset = ingest_external(files, labels, probe)?;
    write_config(cfg)?;
    write_dataset(&cfg.out, &dataset)
}

/// Rebuilds the summary table from one or more results files.
pub fn report(cfg: &RunConfig, results: &[PathBuf]) -> Result<ReportTable> {
    let default = [cfg.out.join("results.csv")];
    let paths = if results.is_empty() { &default[..] } else { results };
    let mut reports = Vec::new();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| Error::format(path, e.to_string()))?;
        reports.extend(parse_report_csv(&text, path)?);
    }
    let table = build_report_table(&reports)?;
    std::fs::create_dir_all(&cfg.out)?;
    write_table(&cfg.out, &table)?;
    Ok(table)
}
