use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid geometry `{id}`: {reason}")]
    Geometry { id: String, reason: String },

    #[error("cannot mesh `{id}`: {reason}")]
    Mesh { id: String, reason: String },

    #[error("singular impedance matrix (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("probe {index} at ({x:.4}, {y:.4}, {z:.4}) lies inside a wire")]
    ProbeInsideWire { index: usize, x: f64, y: f64, z: f64 },

    #[error("field map of `{0}` is identically zero")]
    ZeroField(String),

    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("shape `{id}` failed")]
    Shape {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown shape id `{0}`")]
    UnknownShape(String),

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("ingestion failed for {} file(s): {}", .0.len(), render_failures(.0))]
    Ingest(Vec<(String, String)>),

    #[error("training data: {0}")]
    Training(String),

    #[error("duplicate report for ({classifier}, {probe})")]
    DuplicateReport { classifier: String, probe: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn render_failures(failures: &[(String, String)]) -> String {
    failures
        .iter()
        .map(|(file, why)| format!("{file}: {why}"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format { path: path.into(), reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
