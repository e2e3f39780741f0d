//! Text grid format shared by dB field maps and intensity rasters.
//!
//! ```text
//! # nfscan grid v1
//! shape closed-00
//! kind H
//! combine total
//! units db
//! probes nx=30 ny=30 x_min=0 y_min=0 extent_x=0.3 extent_y=0.3 z=0.02
//! size 30 30
//! <rows of space separated values>
//! ```
//!
//! `kind`, `combine` and `probes` may be `-` when not applicable.

use std::fmt::Write as _;
use std::path::Path;

use super::{Combine, FieldKind, ProbeGrid, RealGrid};
use crate::error::{Error, Result};

const HEADER: &str = "# nfscan grid v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridUnits {
    /// Normalized magnitude in dB, within `[-60, 0]`.
    Db,
    /// Intensity in `[0, 1]`.
    Unit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridText {
    pub shape: String,
    pub kind: Option<FieldKind>,
    pub combine: Option<Combine>,
    pub units: GridUnits,
    pub probes: Option<ProbeGrid>,
    pub data: RealGrid,
}

pub fn write_grid_text(grid: &GridText) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    let _ = writeln!(out, "shape {}", grid.shape);
    let _ = writeln!(out, "kind {}", grid.kind.map_or("-", FieldKind::as_str));
    let _ = writeln!(out, "combine {}", grid.combine.map_or("-", Combine::as_str));
    let units = match grid.units {
        GridUnits::Db => "db",
        GridUnits::Unit => "unit",
    };
    let _ = writeln!(out, "units {units}");
    match &grid.probes {
        Some(p) => {
            let _ = writeln!(
                out,
                "probes nx={} ny={} x_min={:?} y_min={:?} extent_x={:?} extent_y={:?} z={:?}",
                p.nx, p.ny, p.x_min, p.y_min, p.extent_x, p.extent_y, p.plane_height
            );
        }
        None => out.push_str("probes -\n"),
    }
    let _ = writeln!(out, "size {} {}", grid.data.rows, grid.data.cols);
    for r in 0..grid.data.rows {
        let row: Vec<String> =
            (0..grid.data.cols).map(|c| format!("{:?}", grid.data.get(r, c))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_grid_text(text: &str, path: &Path) -> Result<GridText> {
    let bad = |why: String| Error::format(path, why);
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER) {
        return Err(bad("missing grid header".into()));
    }
    let mut field = |name: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad(format!("missing `{name}` line")))?;
        let rest = line
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| bad(format!("expected `{name}` line, found `{line}`")))?;
        Ok(rest.trim().to_string())
    };
    let shape = field("shape")?;
    let kind = match field("kind")?.as_str() {
        "-" => None,
        k => Some(FieldKind::parse(k).ok_or_else(|| bad(format!("unknown kind `{k}`")))?),
    };
    let combine = match field("combine")?.as_str() {
        "-" => None,
        c => Some(Combine::parse(c).ok_or_else(|| bad(format!("unknown combine `{c}`")))?),
    };
    let units = match field("units")?.as_str() {
        "db" => GridUnits::Db,
        "unit" => GridUnits::Unit,
        u => return Err(bad(format!("unknown units `{u}`"))),
    };
    let probes_line = field("probes")?;
    let probes = if probes_line == "-" {
        None
    } else {
        let mut p = ProbeGrid::default();
        for kv in probes_line.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(format!("bad probe field `{kv}`")))?;
            let num = || v.parse::<f64>().map_err(|_| bad(format!("bad number `{v}`")));
            match k {
                "nx" => p.nx = v.parse().map_err(|_| bad(format!("bad nx `{v}`")))?,
                "ny" => p.ny = v.parse().map_err(|_| bad(format!("bad ny `{v}`")))?,
                "x_min" => p.x_min = num()?,
                "y_min" => p.y_min = num()?,
                "extent_x" => p.extent_x = num()?,
                "extent_y" => p.extent_y = num()?,
                "z" => p.plane_height = num()?,
                _ => return Err(bad(format!("unknown probe field `{k}`"))),
            }
        }
        Some(p)
    };
    let size = field("size")?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(format!("bad size `{size}`")))?;
    let (rows, cols) = match dims.as_slice() {
        [r, c] if *r > 0 && *c > 0 => (*r, *c),
        _ => return Err(bad(format!("bad size `{size}`"))),
    };
    let mut values = Vec::with_capacity(rows * cols);
    for (r, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(format!("bad value in data row {r}")))?;
        if row.len() != cols {
            return Err(bad(format!("data row {r} has {} values, expected {cols}", row.len())));
        }
        values.extend(row);
    }
    if values.len() != rows * cols {
        return Err(bad(format!("expected {rows} data rows, found {}", values.len() / cols)));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite value".into()));
    }
    Ok(GridText { shape, kind, combine, units, probes, data: RealGrid::new(rows, cols, values) })
}
