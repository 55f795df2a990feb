//! Boat kinematics, battery drain and static design checks.

use std::f64::consts::PI;

use thiserror::Error;

use crate::geo::{self, EnuOffset, GeoPoint, HeadingDeg};

pub const RUDDER_LIMIT_DEG: f64 = 30.0;

/// Density of fresh water, g/cm³.
const WATER_DENSITY: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VehicleError {
    #[error("current draw {draw_a:.2} A exceeds the H-bridge limit of {limit_a:.2} A")]
    OverCurrent { draw_a: f64, limit_a: f64 },
    #[error("battery depleted at t = {time_s:.1} s")]
    BatteryDepleted { time_s: f64 },
    #[error("hull would sink: load is {fraction:.3} of full displacement")]
    WouldSink { fraction: f64 },
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("line {line}: {message}")]
    ComponentList { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoatState {
    pub pos: GeoPoint,
    pub heading: HeadingDeg,
    pub speed_mps: f64,
    pub odometer_m: f64,
    pub battery_ah: f64,
    pub time_s: f64,
}

impl BoatState {
    pub fn at_rest(pos: GeoPoint, heading: HeadingDeg, battery_ah: f64) -> Self {
        BoatState {
            pos,
            heading,
            speed_mps: 0.0,
            odometer_m: 0.0,
            battery_ah,
            time_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorCommand {
    rudder_deg: f64,
    throttle: f64,
}

impl ActuatorCommand {
    /// Builds a command, clamping the rudder to ±30° and throttle to `[0, 1]`.
    /// Non-finite inputs become zero.
    pub fn new(rudder_deg: f64, throttle: f64) -> Self {
        let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
        ActuatorCommand {
            rudder_deg: finite(rudder_deg).clamp(-RUDDER_LIMIT_DEG, RUDDER_LIMIT_DEG),
            throttle: finite(throttle).clamp(0.0, 1.0),
        }
    }

    pub fn stop() -> Self {
        Self::default()
    }

    pub fn rudder_deg(&self) -> f64 {
        self.rudder_deg
    }

    pub fn throttle(&self) -> f64 {
        self.throttle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleParams {
    /// Heading rate per degree of rudder, in 1/s.
    pub turn_gain: f64,
    pub max_speed_mps: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            turn_gain: 0.5,
            max_speed_mps: 1.0,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), VehicleError> {
        positive("turn_gain", self.turn_gain)?;
        positive("max_speed_mps", self.max_speed_mps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerModel {
    pub bus_voltage_v: f64,
    pub motor_full_current_a: f64,
    /// Sensors and controller.
    pub idle_current_a: f64,
    pub hbridge_limit_a: f64,
    pub battery_capacity_ah: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        PowerModel {
            bus_voltage_v: 12.0,
            motor_full_current_a: 1.1,
            idle_current_a: 0.2,
            hbridge_limit_a: 2.0,
            battery_capacity_ah: 2.0,
        }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<(), VehicleError> {
        positive("bus_voltage_v", self.bus_voltage_v)?;
        positive("motor_full_current_a", self.motor_full_current_a)?;
        positive("idle_current_a", self.idle_current_a)?;
        positive("hbridge_limit_a", self.hbridge_limit_a)?;
        positive("battery_capacity_ah", self.battery_capacity_ah)?;
        let full = self.motor_full_current_a + self.idle_current_a;
        if full > self.hbridge_limit_a {
            return Err(VehicleError::OverCurrent {
                draw_a: full,
                limit_a: self.hbridge_limit_a,
            });
        }
        Ok(())
    }
}

/// Hull made of sealed cylindrical pipes.
#[derive(Debug, Clone, PartialEq)]
pub struct HullSpec {
    pub pipe_count: u32,
    pub pipe_length_cm: f64,
    pub pipe_diameter_cm: f64,
}

impl Default for HullSpec {
    fn default() -> Self {
        HullSpec {
            pipe_count: 4,
            pipe_length_cm: 12.0 * 2.54,
            pipe_diameter_cm: 4.0 * 2.54,
        }
    }
}

impl HullSpec {
    pub fn displacement_cm3(&self) -> f64 {
        let r = self.pipe_diameter_cm / 2.0;
        f64::from(self.pipe_count) * PI * r * r * self.pipe_length_cm
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MassBudget {
    pub components: Vec<(String, f64)>,
}

impl MassBudget {
    /// Parses `name,grams` lines. Blank lines and `#` comments are skipped;
    /// the name may itself contain commas.
    pub fn parse(text: &str) -> Result<Self, VehicleError> {
        let mut components = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| VehicleError::ComponentList {
                line: i + 1,
                message,
            };
            let (name, grams) = line
                .rsplit_once(',')
                .ok_or_else(|| err(format!("expected `name,grams`, got {line:?}")))?;
            let grams: f64 = grams
                .trim()
                .parse()
                .map_err(|_| err(format!("mass {:?} is not a number", grams.trim())))?;
            if !(grams.is_finite() && grams > 0.0) {
                return Err(err(format!("mass must be positive, got {grams}")));
            }
            let name = name.trim();
            if name.is_empty() {
                return Err(err("component name is empty".into()));
            }
            components.push((name.to_string(), grams));
        }
        Ok(MassBudget { components })
    }
}

pub fn step_kinematics(
    state: &BoatState,
    cmd: ActuatorCommand,
    dt: f64,
    params: &VehicleParams,
) -> BoatState {
    let dt = dt.clamp(f64::MIN_POSITIVE, 1.0);
    let heading =
        geo::wrap_heading(state.heading.degrees() + params.turn_gain * cmd.rudder_deg * dt)
            .expect("finite heading");
    let speed = cmd.throttle * params.max_speed_mps;
    let dist = speed * dt;

    let pos = if dist > 0.0 {
        let step = EnuOffset::new(
            dist * heading.radians().sin(),
            dist * heading.radians().cos(),
        );
        geo::from_local_enu(state.pos, step).expect("sub-metre step stays in envelope")
    } else {
        state.pos
    };

    BoatState {
        pos,
        heading,
        speed_mps: speed,
        odometer_m: state.odometer_m + dist,
        battery_ah: state.battery_ah,
        time_s: state.time_s + dt,
    }
}

pub fn current_draw(cmd: ActuatorCommand, pm: &PowerModel) -> Result<f64, VehicleError> {
    let draw_a = pm.idle_current_a + cmd.throttle * pm.motor_full_current_a;
    if draw_a > pm.hbridge_limit_a {
        return Err(VehicleError::OverCurrent {
            draw_a,
            limit_a: pm.hbridge_limit_a,
        });
    }
    Ok(draw_a)
}

/// Removes the charge used over `dt` seconds. The state is untouched when the
/// command would over-draw the H-bridge.
pub fn drain_battery(
    state: &BoatState,
    cmd: ActuatorCommand,
    dt: f64,
    pm: &PowerModel,
) -> Result<BoatState, VehicleError> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(VehicleError::InvalidParameter {
            name: "dt",
            value: dt,
        });
    }
    let amps = current_draw(cmd, pm)?;
    let remaining = (state.battery_ah - amps * dt / 3600.0).max(0.0);
    if remaining <= 0.0 {
        return Err(VehicleError::BatteryDepleted {
            time_s: state.time_s,
        });
    }
    Ok(BoatState {
        battery_ah: remaining,
        ..*state
    })
}

pub fn mass_total(budget: &MassBudget) -> f64 {
    budget.components.iter().map(|(_, g)| g).sum()
}

/// Submerged proportion of the hull at equilibrium.
pub fn buoyancy_fraction(hull: &HullSpec, total_mass_g: f64) -> Result<f64, VehicleError> {
    if total_mass_g.is_nan() || total_mass_g <= 0.0 {
        return Err(VehicleError::InvalidParameter {
            name: "total_mass_g",
            value: total_mass_g,
        });
    }
    if hull.pipe_count == 0 {
        return Err(VehicleError::InvalidParameter {
            name: "pipe_count",
            value: 0.0,
        });
    }
    positive("pipe_length_cm", hull.pipe_length_cm)?;
    positive("pipe_diameter_cm", hull.pipe_diameter_cm)?;

    let fraction = total_mass_g / (hull.displacement_cm3() * WATER_DENSITY);
    if fraction >= 1.0 {
        return Err(VehicleError::WouldSink { fraction });
    }
    Ok(fraction)
}

fn positive(name: &'static str, value: f64) -> Result<(), VehicleError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(VehicleError::InvalidParameter { name, value })
    }
}
