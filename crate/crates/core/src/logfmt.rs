//! The `ASB-LOG v1` survey log.
//!
//! ```text
//! # ASB-LOG v1
//! test,setpoint,lat,lon,depth_cm,dist_m
//! ```
//!
//! Each data line is `test,setpoint,lat,lon,depth,dist` with coordinates at
//! six decimals, depth as whole centimetres and distance at two decimals.
//! Lines end with a single LF. Further `#` lines are comments.

use std::collections::BTreeMap;
use std::io::{self, Write};

use thiserror::Error;

pub const LOG_HEADER: &str = "# ASB-LOG v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("expected 6 fields, found {0}")]
    FieldCount(usize),
    #[error("{field} is not a valid number: {value:?}")]
    NonNumeric { field: &'static str, value: String },
    #[error("depth must be non-negative, got {0}")]
    NegativeDepth(String),
    #[error("{field} out of range: {value:?}")]
    OutOfRange { field: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("line {line}: {source}")]
    Record { line: usize, source: RecordError },
    #[error("missing or unknown log header (expected `{LOG_HEADER}`), found {found:?}")]
    Version { found: String },
    #[error("line {line}: test {test_id} {what} does not increase")]
    Order {
        line: usize,
        test_id: u32,
        what: &'static str,
    },
}

/// One logged depth measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub test_id: u32,
    pub setpoint: u32,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub depth_cm: u32,
    pub dist_m: f64,
}

impl LogRecord {
    /// Builds a record with coordinates and distance snapped to the
    /// resolution the log stores, so that the in-memory value equals what a
    /// reader would get back.
    pub fn quantized(
        test_id: u32,
        setpoint: u32,
        lat_deg: f64,
        lon_deg: f64,
        depth_cm: u32,
        dist_m: f64,
    ) -> Self {
        LogRecord {
            test_id,
            setpoint,
            lat_deg: snap(lat_deg, 1e6),
            lon_deg: snap(lon_deg, 1e6),
            depth_cm,
            dist_m: snap(dist_m, 1e2),
        }
    }
}

fn snap(x: f64, scale: f64) -> f64 {
    // adding 0.0 turns -0.0 into 0.0
    (x * scale).round() / scale + 0.0
}

/// Rounds a depth reading half-up to whole centimetres.
pub fn round_depth_cm(depth_cm: f64) -> u32 {
    (depth_cm + 0.5).floor().max(0.0) as u32
}

pub fn format_record(r: &LogRecord) -> String {
    format!(
        "{},{},{:.6},{:.6},{},{:.2}",
        r.test_id, r.setpoint, r.lat_deg, r.lon_deg, r.depth_cm, r.dist_m
    )
}

pub fn parse_record(line: &str) -> Result<LogRecord, RecordError> {
    let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
    if fields.len() != 6 {
        return Err(RecordError::FieldCount(fields.len()));
    }

    let positive = |field: &'static str, s: &str| -> Result<u32, RecordError> {
        let v: u32 = s.parse().map_err(|_| RecordError::NonNumeric {
            field,
            value: s.to_string(),
        })?;
        if v == 0 {
            return Err(RecordError::OutOfRange {
                field,
                value: s.to_string(),
            });
        }
        Ok(v)
    };
    let real = |field: &'static str, s: &str, limit: f64| -> Result<f64, RecordError> {
        let v: f64 = s.parse().map_err(|_| RecordError::NonNumeric {
            field,
            value: s.to_string(),
        })?;
        if !v.is_finite() || v.abs() > limit {
            return Err(RecordError::OutOfRange {
                field,
                value: s.to_string(),
            });
        }
        Ok(v)
    };

    let test_id = positive("test", fields[0])?;
    let setpoint = positive("setpoint", fields[1])?;
    let lat_deg = real("lat", fields[2], 90.0)?;
    let lon_deg = real("lon", fields[3], 180.0)?;

    let depth = fields[4];
    if depth.parse::<i64>().is_ok_and(|d| d < 0) {
        return Err(RecordError::NegativeDepth(depth.to_string()));
    }
    let depth_cm: u32 = depth.parse().map_err(|_| RecordError::NonNumeric {
        field: "depth",
        value: depth.to_string(),
    })?;

    let dist_m = real("dist", fields[5], f64::MAX)?;
    if dist_m < 0.0 {
        return Err(RecordError::OutOfRange {
            field: "dist",
            value: fields[5].to_string(),
        });
    }

    Ok(LogRecord {
        test_id,
        setpoint,
        lat_deg,
        lon_deg,
        depth_cm,
        dist_m,
    })
}

pub fn parse_log(text: &str) -> Result<Vec<LogRecord>, LogError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end() == LOG_HEADER => {}
        other => {
            return Err(LogError::Version {
                found: other.map(|(_, l)| l.to_string()).unwrap_or_default(),
            })
        }
    }

    let mut last: BTreeMap<u32, LogRecord> = BTreeMap::new();
    let mut records = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let r = parse_record(line).map_err(|source| LogError::Record {
            line: line_no,
            source,
        })?;
        if let Some(prev) = last.get(&r.test_id) {
            let order = |what| LogError::Order {
                line: line_no,
                test_id: r.test_id,
                what,
            };
            if r.setpoint <= prev.setpoint {
                return Err(order("setpoint"));
            }
            if r.dist_m <= prev.dist_m {
                return Err(order("distance"));
            }
        }
        last.insert(r.test_id, r);
        records.push(r);
    }
    Ok(records)
}

pub fn format_log(records: &[LogRecord]) -> String {
    let mut out = String::from(LOG_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    out
}

/// Appends records to a log, flushing after each so a crash never leaves a
/// half-written line behind.
pub struct LogWriter<W: Write> {
    inner: W,
    written: usize,
}

impl<W: Write> LogWriter<W> {
    pub fn new(mut inner: W) -> io::Result<Self> {
        writeln!(inner, "{LOG_HEADER}")?;
        inner.flush()?;
        Ok(LogWriter { inner, written: 0 })
    }

    pub fn write_record(&mut self, r: &LogRecord) -> io::Result<()> {
        let mut line = format_record(r);
        line.push('\n');
        self.inner.write_all(line.as_bytes())?;
        self.inner.flush()?;
        self.written += 1;
        Ok(())
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}
