//! Geodesy primitives on a spherical Earth.
//!
//! Headings and bearings are degrees clockwise from true north. Magnetic
//! declination is taken as zero. The local East-North frame scales longitude
//! by the cosine of the origin latitude and is only valid within
//! [`ENU_ENVELOPE_M`] of its origin.

use std::fmt;

use thiserror::Error;

/// Mean Earth radius used for every spherical computation in the crate.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Largest offset the planar East-North approximation accepts.
pub const ENU_ENVELOPE_M: f64 = 100_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("non-finite angle {0}")]
    NonFinite(f64),
    #[error("coordinate out of range: lat {lat}, lon {lon}")]
    OutOfRange { lat: f64, lon: f64 },
    #[error("bearing is undefined between coincident points")]
    CoincidentPoints,
    #[error("offset of {distance_m:.1} m is outside the {ENU_ENVELOPE_M} m planar envelope")]
    OutsideEnvelope { distance_m: f64 },
}

/// Latitude/longitude position in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self, GeoError> {
        let p = GeoPoint { lat_deg, lon_deg };
        if p.is_valid() {
            Ok(p)
        } else {
            Err(GeoError::OutOfRange {
                lat: lat_deg,
                lon: lon_deg,
            })
        }
    }

    pub fn is_valid(&self) -> bool {
        self.lat_deg.is_finite()
            && self.lon_deg.is_finite()
            && (-90.0..=90.0).contains(&self.lat_deg)
            && (-180.0..=180.0).contains(&self.lon_deg)
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6},{:.6}", self.lat_deg, self.lon_deg)
    }
}

/// A heading in `[0, 360)` degrees clockwise from north.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct HeadingDeg(f64);

impl HeadingDeg {
    pub const NORTH: HeadingDeg = HeadingDeg(0.0);

    /// Wraps any finite angle into `[0, 360)`.
    pub fn new(deg: f64) -> Result<Self, GeoError> {
        wrap_heading(deg)
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }
}

impl fmt::Display for HeadingDeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}°", self.0)
    }
}

/// Offset from an origin in a local East-North plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnuOffset {
    pub east_m: f64,
    pub north_m: f64,
}

impl EnuOffset {
    pub fn new(east_m: f64, north_m: f64) -> Self {
        EnuOffset { east_m, north_m }
    }

    pub fn norm(&self) -> f64 {
        self.east_m.hypot(self.north_m)
    }
}

pub fn wrap_heading(deg: f64) -> Result<HeadingDeg, GeoError> {
    if !deg.is_finite() {
        return Err(GeoError::NonFinite(deg));
    }
    let mut wrapped = deg.rem_euclid(360.0);
    // rem_euclid of a tiny negative value rounds up to exactly 360.0
    if wrapped >= 360.0 {
        wrapped = 0.0;
    }
    Ok(HeadingDeg(wrapped))
}

/// Signed shortest rotation from `current` to `target`, in `(-180, 180]`.
pub fn heading_error(current: HeadingDeg, target: HeadingDeg) -> f64 {
    let diff = (target.0 - current.0).rem_euclid(360.0);
    if diff > 180.0 {
        diff - 360.0
    } else {
        diff
    }
}

pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat_deg.to_radians();
    let lat2 = b.lat_deg.to_radians();
    let dlat = lat2 - lat1;
    let dlon = (b.lon_deg - a.lon_deg).to_radians();

    let s_lat = (dlat * 0.5).sin();
    let s_lon = (dlon * 0.5).sin();
    let h = s_lat * s_lat + lat1.cos() * lat2.cos() * s_lon * s_lon;
    2.0 * EARTH_RADIUS_M * h.sqrt().atan2((1.0 - h).max(0.0).sqrt())
}

/// Forward azimuth from `a` towards `b`.
pub fn initial_bearing(a: GeoPoint, b: GeoPoint) -> Result<HeadingDeg, GeoError> {
    if a == b {
        return Err(GeoError::CoincidentPoints);
    }
    let lat1 = a.lat_deg.to_radians();
    let lat2 = b.lat_deg.to_radians();
    let dlon = (b.lon_deg - a.lon_deg).to_radians();

    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    wrap_heading(y.atan2(x).to_degrees())
}

pub fn to_local_enu(origin: GeoPoint, p: GeoPoint) -> Result<EnuOffset, GeoError> {
    let north_m = EARTH_RADIUS_M * (p.lat_deg - origin.lat_deg).to_radians();
    let east_m = EARTH_RADIUS_M
        * origin.lat_deg.to_radians().cos()
        * (p.lon_deg - origin.lon_deg).to_radians();
    let off = EnuOffset { east_m, north_m };
    check_envelope(off)?;
    Ok(off)
}

pub fn from_local_enu(origin: GeoPoint, off: EnuOffset) -> Result<GeoPoint, GeoError> {
    check_envelope(off)?;
    let lat_deg = origin.lat_deg + (off.north_m / EARTH_RADIUS_M).to_degrees();
    let lon_deg = origin.lon_deg
        + (off.east_m / (EARTH_RADIUS_M * origin.lat_deg.to_radians().cos())).to_degrees();
    GeoPoint::new(lat_deg, lon_deg)
}

fn check_envelope(off: EnuOffset) -> Result<(), GeoError> {
    let distance_m = off.norm();
    if !distance_m.is_finite() || distance_m >= ENU_ENVELOPE_M {
        return Err(GeoError::OutsideEnvelope { distance_m });
    }
    Ok(())
}
