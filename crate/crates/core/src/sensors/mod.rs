//! Sensor models for the echo sounder, compass and GPS receiver, plus NMEA
//! ingestion for logs recorded by a real receiver.
//!
//! Every sampler takes an optional [`RandomStream`]. Passing `None` disables
//! noise, which leaves only the deterministic parts of each model (range
//! limits, wrapping and the GPS position quantum).

mod nmea;
mod rng;

pub use nmea::{nmea_checksum, parse_nmea_sentence, FixSentence, NmeaError, NmeaSentence};
pub use rng::RandomStream;

use thiserror::Error;

use crate::geo::{self, EnuOffset, GeoError, GeoPoint, HeadingDeg};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensorError {
    #[error("true depth {depth_cm} cm is beyond the sounder range [{min_cm}, {max_cm}] cm")]
    OutOfRange {
        depth_cm: f64,
        min_cm: f64,
        max_cm: f64,
    },
    #[error("invalid sensor suite: {0}")]
    InvalidSuite(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

/// Noise and range parameters of the three onboard sensors.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSuite {
    /// Half-width of the uniform echo-sounder error.
    pub depth_accuracy_cm: f64,
    pub depth_min_cm: f64,
    pub depth_max_cm: f64,
    pub compass_sigma_deg: f64,
    /// Per-axis standard deviation of GPS scatter before quantization.
    pub gps_sigma_m: f64,
    /// Edge length of the square cells GPS fixes snap to.
    pub gps_cell_m: f64,
}

impl Default for SensorSuite {
    fn default() -> Self {
        SensorSuite {
            depth_accuracy_cm: 0.3,
            depth_min_cm: 0.0,
            depth_max_cm: 450.0,
            compass_sigma_deg: 1.5,
            gps_sigma_m: 3.0,
            gps_cell_m: 4.0,
        }
    }
}

impl SensorSuite {
    pub fn validate(&self) -> Result<(), SensorError> {
        let positive = [
            ("depth_accuracy_cm", self.depth_accuracy_cm),
            ("compass_sigma_deg", self.compass_sigma_deg),
            ("gps_sigma_m", self.gps_sigma_m),
            ("gps_cell_m", self.gps_cell_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SensorError::InvalidSuite(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.depth_min_cm >= 0.0 && self.depth_min_cm < self.depth_max_cm) {
            return Err(SensorError::InvalidSuite(format!(
                "depth range [{}, {}] is empty",
                self.depth_min_cm, self.depth_max_cm
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsFix {
    pub point: GeoPoint,
    pub valid: bool,
}

impl GpsFix {
    pub fn valid(point: GeoPoint) -> Self {
        GpsFix { point, valid: true }
    }
}

pub fn sample_depth(
    true_depth_cm: f64,
    suite: &SensorSuite,
    rng: Option<&mut RandomStream>,
) -> Result<f64, SensorError> {
    if !(true_depth_cm >= suite.depth_min_cm && true_depth_cm <= suite.depth_max_cm) {
        return Err(SensorError::OutOfRange {
            depth_cm: true_depth_cm,
            min_cm: suite.depth_min_cm,
            max_cm: suite.depth_max_cm,
        });
    }
    let err = rng.map_or(0.0, |r| r.uniform_symmetric(suite.depth_accuracy_cm));
    Ok((true_depth_cm + err).clamp(suite.depth_min_cm, suite.depth_max_cm))
}

pub fn sample_compass(
    true_heading: HeadingDeg,
    suite: &SensorSuite,
    rng: Option<&mut RandomStream>,
) -> HeadingDeg {
    let err = rng.map_or(0.0, |r| r.gaussian(suite.compass_sigma_deg));
    geo::wrap_heading(true_heading.degrees() + err).expect("finite heading")
}

/// Scatters the true position, then snaps it to the centre of its GPS cell.
/// Cells are anchored at `origin`.
pub fn sample_gps(
    true_pos: GeoPoint,
    origin: GeoPoint,
    suite: &SensorSuite,
    rng: Option<&mut RandomStream>,
) -> Result<GpsFix, SensorError> {
    let mut off = geo::to_local_enu(origin, true_pos)?;
    if let Some(r) = rng {
        off.east_m += r.gaussian(suite.gps_sigma_m);
        off.north_m += r.gaussian(suite.gps_sigma_m);
    }
    let snapped = snap_to_cell(off, suite.gps_cell_m);
    Ok(GpsFix::valid(geo::from_local_enu(origin, snapped)?))
}

/// Noise-free GPS quantization of a position.
pub fn quantize_position(
    p: GeoPoint,
    origin: GeoPoint,
    cell_m: f64,
) -> Result<GeoPoint, SensorError> {
    let off = geo::to_local_enu(origin, p)?;
    Ok(geo::from_local_enu(origin, snap_to_cell(off, cell_m))?)
}

fn snap_to_cell(off: EnuOffset, cell_m: f64) -> EnuOffset {
    let centre = |x: f64| ((x / cell_m).floor() + 0.5) * cell_m;
    EnuOffset::new(centre(off.east_m), centre(off.north_m))
}
