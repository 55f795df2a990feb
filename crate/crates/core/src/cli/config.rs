use std::str::FromStr;

use crate::geo::{GeoPoint, HeadingDeg};
use crate::nav::NavGains;
use crate::sensors::SensorSuite;
use crate::vehicle::{HullSpec, PowerModel, VehicleParams};

/// Settings read from a flat `key = value` file. Every key is optional and
/// defaults to the library default, so an empty file is valid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfiguration {
    pub suite: SensorSuite,
    pub power: PowerModel,
    pub vehicle: VehicleParams,
    pub hull: HullSpec,
    pub gains: NavGains,
    pub seed: u64,
    pub noise: bool,
    /// Falls back to the centre of the bathymetry grid.
    pub start: Option<GeoPoint>,
    pub start_heading: HeadingDeg,
}

impl Default for RunConfiguration {
    fn default() -> Self {
        RunConfiguration {
            suite: SensorSuite::default(),
            power: PowerModel::default(),
            vehicle: VehicleParams::default(),
            hull: HullSpec::default(),
            gains: NavGains::default(),
            seed: 0,
            noise: false,
            start: None,
            start_heading: HeadingDeg::NORTH,
        }
    }
}

pub const KEYS: &[&str] = &[
    "depth_accuracy_cm",
    "depth_min_cm",
    "depth_max_cm",
    "compass_sigma_deg",
    "gps_sigma_m",
    "gps_cell_m",
    "bus_voltage_v",
    "motor_full_current_a",
    "idle_current_a",
    "hbridge_limit_a",
    "battery_capacity_ah",
    "turn_gain",
    "max_speed_mps",
    "pipe_count",
    "pipe_length_cm",
    "pipe_diameter_cm",
    "rudder_gain",
    "seed",
    "noise",
    "start_lat",
    "start_lon",
    "start_heading_deg",
];

impl RunConfiguration {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = RunConfiguration::default();
        let mut seen: Vec<&str> = Vec::new();
        let (mut lat, mut lon) = (None, None);

        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: String| format!("config line {}: {msg}", i + 1);
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| at(format!("expected `key = value`, got {line:?}")))?;
            let Some(&key) = KEYS.iter().find(|k| **k == key) else {
                return Err(at(format!("unknown key `{key}`")));
            };
            if seen.contains(&key) {
                return Err(at(format!("duplicate key `{key}`")));
            }
            seen.push(key);

            match key {
                "depth_accuracy_cm" => cfg.suite.depth_accuracy_cm = num(key, value).map_err(at)?,
                "depth_min_cm" => cfg.suite.depth_min_cm = num(key, value).map_err(at)?,
                "depth_max_cm" => cfg.suite.depth_max_cm = num(key, value).map_err(at)?,
                "compass_sigma_deg" => cfg.suite.compass_sigma_deg = num(key, value).map_err(at)?,
                "gps_sigma_m" => cfg.suite.gps_sigma_m = num(key, value).map_err(at)?,
                "gps_cell_m" => cfg.suite.gps_cell_m = num(key, value).map_err(at)?,
                "bus_voltage_v" => cfg.power.bus_voltage_v = num(key, value).map_err(at)?,
                "motor_full_current_a" => {
                    cfg.power.motor_full_current_a = num(key, value).map_err(at)?
                }
                "idle_current_a" => cfg.power.idle_current_a = num(key, value).map_err(at)?,
                "hbridge_limit_a" => cfg.power.hbridge_limit_a = num(key, value).map_err(at)?,
                "battery_capacity_ah" => {
                    cfg.power.battery_capacity_ah = num(key, value).map_err(at)?
                }
                "turn_gain" => cfg.vehicle.turn_gain = num(key, value).map_err(at)?,
                "max_speed_mps" => cfg.vehicle.max_speed_mps = num(key, value).map_err(at)?,
                "pipe_count" => cfg.hull.pipe_count = num(key, value).map_err(at)?,
                "pipe_length_cm" => cfg.hull.pipe_length_cm = num(key, value).map_err(at)?,
                "pipe_diameter_cm" => cfg.hull.pipe_diameter_cm = num(key, value).map_err(at)?,
                "rudder_gain" => cfg.gains.rudder_gain = num(key, value).map_err(at)?,
                "seed" => cfg.seed = num(key, value).map_err(at)?,
                "noise" => cfg.noise = parse_switch(value).map_err(at)?,
                "start_lat" => lat = Some(num::<f64>(key, value).map_err(at)?),
                "start_lon" => lon = Some(num::<f64>(key, value).map_err(at)?),
                "start_heading_deg" => {
                    cfg.start_heading = HeadingDeg::new(num(key, value).map_err(at)?)
                        .map_err(|e| at(e.to_string()))?
                }
                _ => unreachable!("key list and match arms disagree"),
            }
        }

        cfg.start = match (lat, lon) {
            (Some(lat), Some(lon)) => {
                Some(GeoPoint::new(lat, lon).map_err(|e| format!("config: start position: {e}"))?)
            }
            (None, None) => None,
            _ => return Err("config: start_lat and start_lon must be given together".into()),
        };
        Ok(cfg)
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("value {value:?} for `{key}` is not valid"))
}

pub fn parse_switch(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected on/off, got {value:?}")),
    }
}
