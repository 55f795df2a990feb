use std::fmt::Write as _;

use thiserror::Error;

use crate::geo::{self, GeoPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BathyError {
    #[error("malformed header at line {line}: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("missing header key `{0}`")]
    MissingKey(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("negative depth {value} at row {row}, column {col}")]
    NegativeDepth { row: usize, col: usize, value: f64 },
    #[error("bad depth value {text:?} at row {row}, column {col}")]
    BadValue {
        row: usize,
        col: usize,
        text: String,
    },
    #[error("point {0} is outside the grid")]
    OutOfBounds(GeoPoint),
}

/// Depth grid anchored at its south-west node. Values are stored row-major
/// with the northernmost row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Bathymetry {
    ncols: usize,
    nrows: usize,
    origin: GeoPoint,
    cellsize_m: f64,
    depths_cm: Vec<f64>,
}

const EDGE_EPS: f64 = 1e-9;

impl Bathymetry {
    pub fn new(
        ncols: usize,
        nrows: usize,
        origin: GeoPoint,
        cellsize_m: f64,
        depths_cm: Vec<f64>,
    ) -> Result<Self, BathyError> {
        if ncols == 0 || nrows == 0 {
            return Err(BathyError::DimensionMismatch(format!(
                "grid must have at least one node, got {ncols}x{nrows}"
            )));
        }
        if depths_cm.len() != ncols * nrows {
            return Err(BathyError::DimensionMismatch(format!(
                "header gives {ncols}x{nrows} = {} values, body has {}",
                ncols * nrows,
                depths_cm.len()
            )));
        }
        if !(cellsize_m.is_finite() && cellsize_m > 0.0) {
            return Err(BathyError::MalformedHeader {
                line: 0,
                message: format!("cellsize_m must be positive, got {cellsize_m}"),
            });
        }
        if !origin.is_valid() {
            return Err(BathyError::MalformedHeader {
                line: 0,
                message: format!("origin {origin} is not a valid coordinate"),
            });
        }
        for (i, &d) in depths_cm.iter().enumerate() {
            if !d.is_finite() {
                return Err(BathyError::BadValue {
                    row: i / ncols + 1,
                    col: i % ncols + 1,
                    text: d.to_string(),
                });
            }
            if d < 0.0 {
                return Err(BathyError::NegativeDepth {
                    row: i / ncols + 1,
                    col: i % ncols + 1,
                    value: d,
                });
            }
        }
        Ok(Bathymetry {
            ncols,
            nrows,
            origin,
            cellsize_m,
            depths_cm,
        })
    }

    /// Samples `depth(east_m, north_m)` at every node.
    pub fn from_fn(
        ncols: usize,
        nrows: usize,
        origin: GeoPoint,
        cellsize_m: f64,
        depth: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, BathyError> {
        let mut values = Vec::with_capacity(ncols * nrows);
        for r in (0..nrows).rev() {
            for c in 0..ncols {
                values.push(depth(c as f64 * cellsize_m, r as f64 * cellsize_m));
            }
        }
        Self::new(ncols, nrows, origin, cellsize_m, values)
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn cellsize_m(&self) -> f64 {
        self.cellsize_m
    }

    /// Node value by column and row counted from the south edge.
    pub fn node(&self, col: usize, row_from_south: usize) -> f64 {
        self.depths_cm[(self.nrows - 1 - row_from_south) * self.ncols + col]
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        self.grid_coords(p).is_some()
    }

    fn grid_coords(&self, p: GeoPoint) -> Option<(f64, f64)> {
        let off = geo::to_local_enu(self.origin, p).ok()?;
        let x = off.east_m / self.cellsize_m;
        let y = off.north_m / self.cellsize_m;
        let xmax = (self.ncols - 1) as f64;
        let ymax = (self.nrows - 1) as f64;
        if x < -EDGE_EPS || y < -EDGE_EPS || x > xmax + EDGE_EPS || y > ymax + EDGE_EPS {
            return None;
        }
        Some((x.clamp(0.0, xmax), y.clamp(0.0, ymax)))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "ncols {}\nnrows {}\nlat0 {:.6}\nlon0 {:.6}\ncellsize_m {}\n",
            self.ncols, self.nrows, self.origin.lat_deg, self.origin.lon_deg, self.cellsize_m
        );
        for row in self.depths_cm.chunks(self.ncols) {
            let line: Vec<String> = row.iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

/// Bilinear interpolation of the four nodes around `p`.
pub fn depth_at(b: &Bathymetry, p: GeoPoint) -> Result<f64, BathyError> {
    let (x, y) = b.grid_coords(p).ok_or(BathyError::OutOfBounds(p))?;
    let cell = |v: f64, n: usize| -> (usize, f64) {
        if n < 2 {
            return (0, 0.0);
        }
        let i = (v.floor() as usize).min(n - 2);
        (i, v - i as f64)
    };
    let (c0, fx) = cell(x, b.ncols);
    let (r0, fy) = cell(y, b.nrows);
    let c1 = (c0 + 1).min(b.ncols - 1);
    let r1 = (r0 + 1).min(b.nrows - 1);

    let south = b.node(c0, r0) * (1.0 - fx) + b.node(c1, r0) * fx;
    let north = b.node(c0, r1) * (1.0 - fx) + b.node(c1, r1) * fx;
    Ok(south * (1.0 - fy) + north * fy)
}

pub fn load_bathymetry(text: &str) -> Result<Bathymetry, BathyError> {
    const KEYS: [&str; 5] = ["ncols", "nrows", "lat0", "lon0", "cellsize_m"];
    let mut header: [Option<f64>; 5] = [None; 5];
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .peekable();

    while header.iter().any(Option::is_none) {
        let Some((i, line)) = lines.next() else {
            let missing = KEYS[header.iter().position(Option::is_none).unwrap()];
            return Err(BathyError::MissingKey(missing));
        };
        let bad = |message: String| BathyError::MalformedHeader {
            line: i + 1,
            message,
        };
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let Some(slot) = KEYS.iter().position(|k| k.eq_ignore_ascii_case(key)) else {
            let missing = KEYS[header.iter().position(Option::is_none).unwrap()];
            return if key.parse::<f64>().is_ok() {
                Err(BathyError::MissingKey(missing))
            } else {
                Err(bad(format!("unknown key `{key}`")))
            };
        };
        if header[slot].is_some() {
            return Err(bad(format!("duplicate key `{key}`")));
        }
        let value = match (parts.next(), parts.next()) {
            (Some(v), None) => v
                .parse::<f64>()
                .map_err(|_| bad(format!("value {v:?} for `{key}` is not a number")))?,
            _ => return Err(bad(format!("expected `{key} <value>`"))),
        };
        header[slot] = Some(value);
    }

    let [ncols, nrows, lat0, lon0, cellsize] = header.map(Option::unwrap);
    let dim = |name: &str, v: f64| -> Result<usize, BathyError> {
        if v.fract() == 0.0 && (1.0..=1e7).contains(&v) {
            Ok(v as usize)
        } else {
            Err(BathyError::MalformedHeader {
                line: 0,
                message: format!("{name} must be a positive integer, got {v}"),
            })
        }
    };
    let ncols = dim("ncols", ncols)?;
    let nrows = dim("nrows", nrows)?;

    let mut values = Vec::with_capacity(ncols * nrows);
    for (row, (_, line)) in lines.enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if row < nrows && tokens.len() != ncols {
            return Err(BathyError::DimensionMismatch(format!(
                "row {} has {} values, expected {ncols}",
                row + 1,
                tokens.len()
            )));
        }
        for (col, tok) in tokens.iter().enumerate() {
            let v: f64 = tok.parse().map_err(|_| BathyError::BadValue {
                row: row + 1,
                col: col + 1,
                text: tok.to_string(),
            })?;
            values.push(v);
        }
    }
    if values.len() != ncols * nrows {
        return Err(BathyError::DimensionMismatch(format!(
            "header gives {ncols}x{nrows} = {} values, body has {}",
            ncols * nrows,
            values.len()
        )));
    }

    Bathymetry::new(
        ncols,
        nrows,
        GeoPoint {
            lat_deg: lat0,
            lon_deg: lon0,
        },
        cellsize,
        values,
    )
}
