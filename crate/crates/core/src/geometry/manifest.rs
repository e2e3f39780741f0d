//! Line-oriented text export of a wire library: one `shape` record per line.
//!
//! ```text
//! # nfscan wire library v1
//! shape id=closed-00 label=0 closed=true radius=0.001 height=0.01 source=corner:0 vertices=x,y,z;x,y,z;...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{Placement, Point, WireGeometry};
use crate::error::{Error, Result};

const HEADER: &str = "# nfscan wire library v1";

pub fn write_library_manifest(library: &[WireGeometry]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for g in library {
        let vertices = g
            .vertices
            .iter()
            .map(|v| format!("{:?},{:?},{:?}", v.x, v.y, v.z))
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(
            out,
            "shape id={} label={} closed={} radius={:?} height={:?} source={}:{} vertices={}",
            g.id,
            g.label,
            g.closed,
            g.radius,
            g.height,
            g.placement.as_str(),
            g.source_segment,
            vertices
        );
    }
    out
}

/// Parses the text written by [`write_library_manifest`]; `path` only
/// labels error messages.
pub fn parse_library_manifest(text: &str, path: &Path) -> Result<Vec<WireGeometry>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == HEADER => {}
        _ => return Err(Error::format(path, "missing wire library header")),
    }
    let mut library = Vec::new();
    for (number, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |why: &str| Error::format(path, format!("line {}: {why}", number + 1));
        let mut fields = line.split_whitespace();
        if fields.next() != Some("shape") {
            return Err(bad("expected a `shape` record"));
        }
        let mut id = None;
        let mut label = None;
        let mut closed = None;
        let mut radius = None;
        let mut source = None;
        let mut vertices = None;
        for field in fields {
            let (key, value) = field.split_once('=').ok_or_else(|| bad("field without `=`"))?;
            match key {
                "id" => id = Some(value.to_string()),
                "label" => label = Some(value.parse::<u8>().map_err(|_| bad("bad label"))?),
                "closed" => closed = Some(value.parse::<bool>().map_err(|_| bad("bad closed"))?),
                "radius" => radius = Some(value.parse::<f64>().map_err(|_| bad("bad radius"))?),
                "height" => {}
                "source" => {
                    let (kind, index) = value.split_once(':').ok_or_else(|| bad("bad source"))?;
                    let placement = Placement::parse(kind).ok_or_else(|| bad("bad placement"))?;
                    let index = index.parse::<usize>().map_err(|_| bad("bad source index"))?;
                    source = Some((placement, index));
                }
                "vertices" => {
                    let mut list = Vec::new();
                    for triple in value.split(';') {
                        let c: Vec<f64> = triple
                            .split(',')
                            .map(str::parse)
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|_| bad("bad vertex"))?;
                        if c.len() != 3 {
                            return Err(bad("vertex needs three coordinates"));
                        }
                        list.push(Point::new(c[0], c[1], c[2]));
                    }
                    vertices = Some(list);
                }
                _ => return Err(bad(&format!("unknown field `{key}`"))),
            }
        }
        let missing = || bad("incomplete shape record");
        let (placement, source_segment) = source.ok_or_else(missing)?;
        let geometry = WireGeometry::new(
            id.ok_or_else(missing)?,
            vertices.ok_or_else(missing)?,
            closed.ok_or_else(missing)?,
            radius.ok_or_else(missing)?,
            placement,
            source_segment,
        )
        .map_err(|e| bad(&e.to_string()))?;
        if Some(geometry.label) != label {
            return Err(bad("label disagrees with topology"));
        }
        library.push(geometry);
    }
    Ok(library)
}
