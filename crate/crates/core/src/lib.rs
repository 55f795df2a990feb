//! Navigation and survey stack for an autonomous depth-surveying boat.
//!
//! The boat follows a list of GPS waypoints, steering by compass, and at
//! each one records the water depth from an ultrasonic sounder. This crate
//! models that system end to end:
//!
//! - [`geo`]: spherical geodesy and a local East-North frame
//! - [`sensors`]: seeded sounder, compass and GPS models; NMEA ingestion
//! - [`vehicle`]: kinematics, battery drain and static design checks
//! - [`nav`]: the waypoint-following controller and mission files
//! - [`sim`]: bathymetry grids and the closed-loop mission runner
//! - [`logfmt`]: the `ASB-LOG v1` survey log
//! - [`analytics`]: mean depth, capacity and silting estimates
//! - [`plot`]: CSV and SVG depth profiles
//! - [`cli`]: the `asb` command-line front end

pub mod analytics;
pub mod cli;
pub mod geo;
pub mod logfmt;
pub mod nav;
pub mod plot;
pub mod sensors;
pub mod sim;
pub mod vehicle;
