//! Waypoint-following controller.
//!
//! [`nav_step`] is a pure transition function over [`NavPhase`]. Each
//! waypoint runs through `Align -> Transit -> Measure`; after the last
//! measurement the controller sits in `Done`. [`Navigator`] wraps it with
//! the step budget.

use std::fmt;

use thiserror::Error;

use crate::geo::{self, GeoPoint, HeadingDeg};
use crate::sensors::GpsFix;
use crate::vehicle::{ActuatorCommand, RUDDER_LIMIT_DEG};

/// Waypoints closer than this form a degenerate leg.
pub const MIN_LEG_M: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NavError {
    #[error("no valid GPS fix")]
    NoFix,
    #[error("step budget of {max_steps} exhausted in phase {phase}")]
    NavTimeout { max_steps: u64, phase: NavPhase },
    #[error("line {line}: {message}")]
    MissionFile { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    /// 1-based ordinal, logged as the setpoint number.
    pub index: u32,
    pub point: GeoPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub test_id: u32,
    pub waypoints: Vec<Waypoint>,
    pub arrival_radius_m: f64,
    pub heading_tolerance_deg: f64,
    pub samples_per_point: u32,
    pub max_steps: u64,
}

impl Default for Mission {
    fn default() -> Self {
        Mission {
            test_id: 1,
            waypoints: Vec::new(),
            arrival_radius_m: 4.0,
            heading_tolerance_deg: 5.0,
            samples_per_point: 5,
            max_steps: 200_000,
        }
    }
}

impl Mission {
    pub fn from_points(test_id: u32, points: impl IntoIterator<Item = GeoPoint>) -> Self {
        let waypoints = points
            .into_iter()
            .zip(1..)
            .map(|(point, index)| Waypoint { index, point })
            .collect();
        Mission {
            test_id,
            waypoints,
            ..Mission::default()
        }
    }

    /// Parses the mission text format:
    ///
    /// ```text
    /// # comment
    /// @test 3
    /// @radius 4.0
    /// @tolerance 5.0
    /// 33.971902,71.441588
    /// ```
    ///
    /// `@samples` and `@max_steps` are also accepted. Coordinates are not
    /// range-checked here; [`validate_mission`] reports them.
    pub fn parse(text: &str) -> Result<Self, NavError> {
        let mut mission = Mission::default();
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| NavError::MissionFile {
                line: i + 1,
                message,
            };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(directive) = line.strip_prefix('@') {
                let (key, value) = directive
                    .split_once(char::is_whitespace)
                    .map(|(k, v)| (k, v.trim()))
                    .ok_or_else(|| err(format!("directive {line:?} has no value")))?;
                let bad = || err(format!("bad value {value:?} for @{key}"));
                match key {
                    "test" => mission.test_id = value.parse().map_err(|_| bad())?,
                    "radius" => mission.arrival_radius_m = value.parse().map_err(|_| bad())?,
                    "tolerance" => {
                        mission.heading_tolerance_deg = value.parse().map_err(|_| bad())?
                    }
                    "samples" => mission.samples_per_point = value.parse().map_err(|_| bad())?,
                    "max_steps" => mission.max_steps = value.parse().map_err(|_| bad())?,
                    _ => return Err(err(format!("unknown directive @{key}"))),
                }
                continue;
            }
            let (lat, lon) = line
                .split_once(',')
                .ok_or_else(|| err(format!("expected `lat,lon`, got {line:?}")))?;
            let lat: f64 = lat
                .trim()
                .parse()
                .map_err(|_| err(format!("latitude {:?} is not a number", lat.trim())))?;
            let lon: f64 = lon
                .trim()
                .parse()
                .map_err(|_| err(format!("longitude {:?} is not a number", lon.trim())))?;
            points.push(GeoPoint {
                lat_deg: lat,
                lon_deg: lon,
            });
        }
        mission.waypoints = Mission::from_points(0, points).waypoints;
        Ok(mission)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "@test {}\n@radius {}\n@tolerance {}\n@samples {}\n@max_steps {}\n",
            self.test_id,
            self.arrival_radius_m,
            self.heading_tolerance_deg,
            self.samples_per_point,
            self.max_steps
        );
        for wp in &self.waypoints {
            out.push_str(&format!("{}\n", wp.point));
        }
        out
    }

    /// Non-fatal advisories about a mission that otherwise validates.
    pub fn warnings(&self, gps_cell_m: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.arrival_radius_m < gps_cell_m {
            out.push(format!(
                "arrival radius {} m is below the {} m GPS quantum; arrival may never register",
                self.arrival_radius_m, gps_cell_m
            ));
        }
        for pair in self.waypoints.windows(2) {
            let d = geo::haversine_distance(pair[0].point, pair[1].point);
            if d >= MIN_LEG_M && d < 2.0 * self.arrival_radius_m {
                out.push(format!(
                    "leg {} -> {} is {:.2} m, shorter than twice the arrival radius",
                    pair[0].index, pair[1].index, d
                ));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoWaypoints,
    CoordinateOutOfRange { index: u32, point: GeoPoint },
    DegenerateLeg { from: u32, to: u32, distance_m: f64 },
    IndexOrder { index: u32 },
    NonPositive { name: &'static str, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoWaypoints => write!(f, "no waypoints"),
            Violation::CoordinateOutOfRange { index, point } => write!(
                f,
                "waypoint {index}: coordinate out of range ({}, {})",
                point.lat_deg, point.lon_deg
            ),
            Violation::DegenerateLeg {
                from,
                to,
                distance_m,
            } => write!(
                f,
                "degenerate leg: waypoints {from} and {to} are {distance_m:.2} m apart"
            ),
            Violation::IndexOrder { index } => {
                write!(f, "waypoint {index}: indices must strictly increase")
            }
            Violation::NonPositive { name, value } => {
                write!(f, "{name} must be positive, got {value}")
            }
        }
    }
}

pub fn validate_mission(m: &Mission) -> Vec<Violation> {
    let mut out = Vec::new();
    if m.waypoints.is_empty() {
        out.push(Violation::NoWaypoints);
    }
    if m.test_id == 0 {
        out.push(Violation::NonPositive {
            name: "test_id",
            value: 0.0,
        });
    }
    let params = [
        ("arrival_radius_m", m.arrival_radius_m),
        ("heading_tolerance_deg", m.heading_tolerance_deg),
        ("samples_per_point", f64::from(m.samples_per_point)),
        ("max_steps", m.max_steps as f64),
    ];
    for (name, value) in params {
        if !(value.is_finite() && value > 0.0) {
            out.push(Violation::NonPositive { name, value });
        }
    }
    for wp in &m.waypoints {
        if wp.index == 0 {
            out.push(Violation::IndexOrder { index: wp.index });
        }
        if !wp.point.is_valid() {
            out.push(Violation::CoordinateOutOfRange {
                index: wp.index,
                point: wp.point,
            });
        }
    }
    for pair in m.waypoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b.index <= a.index {
            out.push(Violation::IndexOrder { index: b.index });
        }
        if a.point.is_valid() && b.point.is_valid() {
            let distance_m = geo::haversine_distance(a.point, b.point);
            if distance_m < MIN_LEG_M {
                out.push(Violation::DegenerateLeg {
                    from: a.index,
                    to: b.index,
                    distance_m,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavGains {
    pub rudder_gain: f64,
}

impl Default for NavGains {
    fn default() -> Self {
        NavGains { rudder_gain: 0.8 }
    }
}

/// Controller phase; the payload is the position of the active waypoint in
/// the mission list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavPhase {
    Align(usize),
    Transit(usize),
    Measure(usize),
    Done,
}

impl NavPhase {
    pub fn waypoint(self) -> Option<usize> {
        match self {
            NavPhase::Align(i) | NavPhase::Transit(i) | NavPhase::Measure(i) => Some(i),
            NavPhase::Done => None,
        }
    }
}

impl fmt::Display for NavPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NavPhase::Align(i) => write!(f, "align to waypoint #{}", i + 1),
            NavPhase::Transit(i) => write!(f, "transit to waypoint #{}", i + 1),
            NavPhase::Measure(i) => write!(f, "measure at waypoint #{}", i + 1),
            NavPhase::Done => write!(f, "done"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NavAction {
    TakeMeasurement(Waypoint),
    MissionComplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavOutput {
    pub command: ActuatorCommand,
    /// Empty on most steps. The final measurement step carries both
    /// `TakeMeasurement` and `MissionComplete`.
    pub actions: Vec<NavAction>,
}

impl NavOutput {
    fn command(command: ActuatorCommand) -> Self {
        NavOutput {
            command,
            actions: Vec::new(),
        }
    }
}

pub fn rudder_command(err_deg: f64, gain: f64) -> f64 {
    (gain * err_deg).clamp(-RUDDER_LIMIT_DEG, RUDDER_LIMIT_DEG)
}

pub fn arrival_check(fix: &GpsFix, wp: &Waypoint, radius_m: f64) -> Result<bool, NavError> {
    if !fix.valid {
        return Err(NavError::NoFix);
    }
    Ok(geo::haversine_distance(fix.point, wp.point) <= radius_m)
}

pub fn nav_step(
    phase: NavPhase,
    fix: &GpsFix,
    compass: HeadingDeg,
    m: &Mission,
    gains: &NavGains,
) -> Result<(NavPhase, NavOutput), NavError> {
    let steer = |i: usize| -> Result<f64, NavError> {
        if !fix.valid {
            return Err(NavError::NoFix);
        }
        // a fix on top of the waypoint leaves nothing to steer towards
        let err = match geo::initial_bearing(fix.point, m.waypoints[i].point) {
            Ok(bearing) => geo::heading_error(compass, bearing),
            Err(_) => 0.0,
        };
        Ok(err)
    };

    match phase {
        NavPhase::Align(i) => {
            let err = steer(i)?;
            let rudder = rudder_command(err, gains.rudder_gain);
            if err.abs() <= m.heading_tolerance_deg {
                // leave at full throttle so the boat is under way before the
                // first arrival check of the new leg
                Ok((
                    NavPhase::Transit(i),
                    NavOutput::command(ActuatorCommand::new(rudder, 1.0)),
                ))
            } else {
                Ok((
                    NavPhase::Align(i),
                    NavOutput::command(ActuatorCommand::new(rudder, 0.0)),
                ))
            }
        }
        NavPhase::Transit(i) => {
            if arrival_check(fix, &m.waypoints[i], m.arrival_radius_m)? {
                return Ok((
                    NavPhase::Measure(i),
                    NavOutput::command(ActuatorCommand::stop()),
                ));
            }
            let err = steer(i)?;
            Ok((
                NavPhase::Transit(i),
                NavOutput::command(ActuatorCommand::new(
                    rudder_command(err, gains.rudder_gain),
                    1.0,
                )),
            ))
        }
        NavPhase::Measure(i) => {
            let mut actions = vec![NavAction::TakeMeasurement(m.waypoints[i])];
            let next = if i + 1 < m.waypoints.len() {
                NavPhase::Align(i + 1)
            } else {
                actions.push(NavAction::MissionComplete);
                NavPhase::Done
            };
            Ok((
                next,
                NavOutput {
                    command: ActuatorCommand::stop(),
                    actions,
                },
            ))
        }
        NavPhase::Done => Ok((NavPhase::Done, NavOutput::command(ActuatorCommand::stop()))),
    }
}

/// Runs [`nav_step`] under the mission's step budget.
#[derive(Debug, Clone)]
pub struct Navigator {
    phase: NavPhase,
    steps: u64,
}

impl Default for Navigator {
    fn default() -> Self {
        Self::new()
    }
}

impl Navigator {
    pub fn new() -> Self {
        Navigator {
            phase: NavPhase::Align(0),
            steps: 0,
        }
    }

    pub fn phase(&self) -> NavPhase {
        self.phase
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(
        &mut self,
        fix: &GpsFix,
        compass: HeadingDeg,
        m: &Mission,
        gains: &NavGains,
    ) -> Result<NavOutput, NavError> {
        if m.waypoints.is_empty() {
            self.phase = NavPhase::Done;
        }
        if self.phase != NavPhase::Done && self.steps >= m.max_steps {
            return Err(NavError::NavTimeout {
                max_steps: m.max_steps,
                phase: self.phase,
            });
        }
        let (next, out) = nav_step(self.phase, fix, compass, m, gains)?;
        self.phase = next;
        self.steps += 1;
        Ok(out)
    }
}
