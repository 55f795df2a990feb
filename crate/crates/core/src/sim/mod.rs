//! Closed-loop mission simulation over a bathymetry grid.
//!
//! Each 0.1 s tick reads the GPS and compass, runs the controller, then
//! integrates the boat and drains the battery. Depth is sounded at the
//! boat's true position while the logged coordinates come from the GPS fix,
//! as on the physical boat.

mod bathymetry;

pub use bathymetry::{depth_at, load_bathymetry, BathyError, Bathymetry};

use std::io::{self, Write};

use thiserror::Error;

use crate::geo::{GeoPoint, HeadingDeg};
use crate::logfmt::{round_depth_cm, LogRecord, LogWriter};
use crate::nav::{
    validate_mission, Mission, NavAction, NavError, NavGains, NavPhase, Navigator, Violation,
};
use crate::sensors::{self, RandomStream, SensorSuite};
use crate::vehicle::{self, BoatState, PowerModel, VehicleError, VehicleParams};

/// Fixed integration step.
pub const DT_S: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid mission: {}", join(.0))]
    InvalidMission(Vec<Violation>),
    #[error("start position {0} is outside the bathymetry grid")]
    StartOutsideGrid(GeoPoint),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("writing log: {0}")]
    Io(#[from] io::Error),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub mission: Mission,
    pub bathymetry: Bathymetry,
    pub suite: SensorSuite,
    pub power: PowerModel,
    pub vehicle: VehicleParams,
    pub gains: NavGains,
    pub seed: u64,
    pub noise_enabled: bool,
    pub start_pos: GeoPoint,
    pub start_heading: HeadingDeg,
}

impl SimConfig {
    /// Default parameters for `mission` over `bathymetry`.
    pub fn new(mission: Mission, bathymetry: Bathymetry, start_pos: GeoPoint) -> Self {
        SimConfig {
            mission,
            bathymetry,
            suite: SensorSuite::default(),
            power: PowerModel::default(),
            vehicle: VehicleParams::default(),
            gains: NavGains::default(),
            seed: 0,
            noise_enabled: false,
            start_pos,
            start_heading: HeadingDeg::NORTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    NavTimeout { phase: NavPhase },
    BatteryDepleted,
    SensorFault { message: String },
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Completed => write!(f, "completed"),
            Termination::NavTimeout { phase } => write!(f, "navigation timeout ({phase})"),
            Termination::BatteryDepleted => write!(f, "battery depleted"),
            Termination::SensorFault { message } => write!(f, "sensor fault: {message}"),
        }
    }
}

/// Ground truth behind one logged record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementTruth {
    pub true_pos: GeoPoint,
    pub true_depth_cm: f64,
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub records: Vec<LogRecord>,
    pub truth: Vec<MeasurementTruth>,
    /// Boat state at t = 0 and after every tick.
    pub trajectory: Vec<BoatState>,
    pub termination: Termination,
}

pub fn run_mission(cfg: &SimConfig) -> Result<SimRun, SimError> {
    run(cfg, &mut |_| Ok(()))
}

/// Runs the mission, appending each record to `log` as soon as it is taken.
pub fn run_mission_logged<W: Write>(
    cfg: &SimConfig,
    log: &mut LogWriter<W>,
) -> Result<SimRun, SimError> {
    run(cfg, &mut |r| log.write_record(r))
}

fn check(cfg: &SimConfig) -> Result<(), SimError> {
    let violations = validate_mission(&cfg.mission);
    if !violations.is_empty() {
        return Err(SimError::InvalidMission(violations));
    }
    cfg.suite
        .validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    cfg.power
        .validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    cfg.vehicle
        .validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    if !(cfg.gains.rudder_gain.is_finite() && cfg.gains.rudder_gain > 0.0) {
        return Err(SimError::InvalidConfig(format!(
            "rudder_gain must be positive, got {}",
            cfg.gains.rudder_gain
        )));
    }
    if !cfg.start_pos.is_valid() || !cfg.bathymetry.contains(cfg.start_pos) {
        return Err(SimError::StartOutsideGrid(cfg.start_pos));
    }
    Ok(())
}

fn run(
    cfg: &SimConfig,
    sink: &mut dyn FnMut(&LogRecord) -> io::Result<()>,
) -> Result<SimRun, SimError> {
    check(cfg)?;

    let mission = &cfg.mission;
    let suite = &cfg.suite;
    // GPS cells are anchored at the first waypoint
    let anchor = mission.waypoints[0].point;
    let stream = |label| {
        cfg.noise_enabled
            .then(|| RandomStream::derive(cfg.seed, label))
    };
    let mut gps_rng = stream("gps");
    let mut compass_rng = stream("compass");
    let mut depth_rng = stream("depth");

    let mut state = BoatState::at_rest(
        cfg.start_pos,
        cfg.start_heading,
        cfg.power.battery_capacity_ah,
    );
    let mut nav = Navigator::new();
    let mut run = SimRun {
        records: Vec::new(),
        truth: Vec::new(),
        trajectory: vec![state],
        termination: Termination::Completed,
    };
    let fault = |message: String| Termination::SensorFault { message };

    run.termination = 'mission: loop {
        let fix = match sensors::sample_gps(state.pos, anchor, suite, gps_rng.as_mut()) {
            Ok(f) => f,
            Err(e) => break fault(format!("GPS: {e}")),
        };
        let compass = sensors::sample_compass(state.heading, suite, compass_rng.as_mut());

        let out = match nav.step(&fix, compass, mission, &cfg.gains) {
            Ok(out) => out,
            Err(NavError::NavTimeout { phase, .. }) => break Termination::NavTimeout { phase },
            Err(e) => break fault(e.to_string()),
        };

        let mut complete = false;
        for action in out.actions {
            match action {
                NavAction::TakeMeasurement(wp) => {
                    let truth = match depth_at(&cfg.bathymetry, state.pos) {
                        Ok(d) => d,
                        Err(e) => break 'mission fault(format!("setpoint {}: {e}", wp.index)),
                    };
                    let mut samples = Vec::with_capacity(mission.samples_per_point as usize);
                    for _ in 0..mission.samples_per_point {
                        match sensors::sample_depth(truth, suite, depth_rng.as_mut()) {
                            Ok(d) => samples.push(d),
                            Err(e) => break 'mission fault(format!("setpoint {}: {e}", wp.index)),
                        }
                    }
                    let record = LogRecord::quantized(
                        mission.test_id,
                        wp.index,
                        fix.point.lat_deg,
                        fix.point.lon_deg,
                        round_depth_cm(median(&mut samples)),
                        state.odometer_m,
                    );
                    sink(&record)?;
                    run.records.push(record);
                    run.truth.push(MeasurementTruth {
                        true_pos: state.pos,
                        true_depth_cm: truth,
                    });
                }
                NavAction::MissionComplete => complete = true,
            }
        }
        if complete {
            break Termination::Completed;
        }

        state = vehicle::step_kinematics(&state, out.command, DT_S, &cfg.vehicle);
        match vehicle::drain_battery(&state, out.command, DT_S, &cfg.power) {
            Ok(s) => state = s,
            Err(VehicleError::BatteryDepleted { .. }) => {
                state.battery_ah = 0.0;
                run.trajectory.push(state);
                break Termination::BatteryDepleted;
            }
            Err(e) => break fault(e.to_string()),
        }
        run.trajectory.push(state);
    };

    Ok(run)
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}
