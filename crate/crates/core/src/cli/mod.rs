//! The `asb` command line.
//!
//! Results go to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 1 invalid input, 2 I/O failure, 3 the run or design check failed.

mod config;

pub use config::RunConfiguration;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analytics::{self, capacity_estimate, depth_profile, group_by_test, summarize};
use crate::logfmt::{parse_log, LogRecord, LogWriter};
use crate::nav::{validate_mission, Mission};
use crate::plot;
use crate::sensors::{parse_nmea_sentence, NmeaSentence};
use crate::sim::{self, load_bathymetry, SimConfig, SimError, Termination};
use crate::vehicle::{self, ActuatorCommand, MassBudget, VehicleError};

#[derive(Debug, Parser)]
#[command(
    name = "asb",
    version,
    about = "Autonomous surveying boat: simulate, log and analyze depth surveys"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotFormat {
    Csv,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a survey mission and write an ASB-LOG file
    Sim {
        #[arg(long)]
        mission: PathBuf,
        #[arg(long)]
        bathy: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `seed` from the config file
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `noise` from the config file
        #[arg(long, value_enum)]
        noise: Option<Switch>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summarize each test in a survey log
    Analyze {
        log: PathBuf,
        /// Basin length in metres, for the capacity estimate
        #[arg(long, requires = "width")]
        length: Option<f64>,
        /// Basin width in metres, for the capacity estimate
        #[arg(long, requires = "length")]
        width: Option<f64>,
        /// Earlier survey of the same basin, for the silting ratio
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Emit the depth profile of a survey log as CSV or SVG
    Plot {
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "svg")]
        format: PlotFormat,
        /// Restrict to one test
        #[arg(long)]
        test: Option<u32>,
    },
    /// Check mass, buoyancy and current budget
    CheckDesign {
        #[arg(long)]
        components: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Extract positions from an NMEA 0183 log
    Nmea { path: PathBuf },
    /// Check a mission file
    Validate { mission: PathBuf },
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Io(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Io(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Io(m) | Failure::Runtime(m) => m,
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    execute(cli.command, out, err)
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match command {
        Command::Sim {
            mission,
            bathy,
            out: log_path,
            seed,
            noise,
            config,
        } => cmd_sim(
            &mission,
            &bathy,
            &log_path,
            seed,
            noise,
            config.as_deref(),
            out,
            err,
        ),
        Command::Analyze {
            log,
            length,
            width,
            reference,
        } => cmd_analyze(&log, length.zip(width), reference.as_deref(), out),
        Command::Plot {
            log,
            out: path,
            format,
            test,
        } => cmd_plot(&log, &path, format, test, out),
        Command::CheckDesign { components, config } => {
            cmd_check_design(&components, config.as_deref(), out)
        }
        Command::Nmea { path } => cmd_nmea(&path, out, err),
        Command::Validate { mission } => cmd_validate(&mission, out, err),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "asb: {}", f.message());
            f.code()
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn stdout_err(e: io::Error) -> Failure {
    Failure::Io(format!("stdout: {e}"))
}

fn load_config(path: Option<&Path>) -> Result<RunConfiguration, Failure> {
    match path {
        Some(p) => RunConfiguration::parse(&read(p)?)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))),
        None => Ok(RunConfiguration::default()),
    }
}

fn load_log(path: &Path) -> Result<Vec<LogRecord>, Failure> {
    parse_log(&read(path)?).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sim(
    mission_path: &Path,
    bathy_path: &Path,
    log_path: &Path,
    seed: Option<u64>,
    noise: Option<Switch>,
    config_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let mission_text = read(mission_path)?;
    let bathy_text = read(bathy_path)?;
    let rc = load_config(config_path)?;

    let mission = Mission::parse(&mission_text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", mission_path.display())))?;
    let bathymetry = load_bathymetry(&bathy_text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", bathy_path.display())))?;

    for w in mission.warnings(rc.suite.gps_cell_m) {
        let _ = writeln!(err, "warning: {w}");
    }

    let start = match rc.start {
        Some(p) => p,
        None => {
            let half = |n: usize| (n - 1) as f64 * bathymetry.cellsize_m() / 2.0;
            crate::geo::from_local_enu(
                bathymetry.origin(),
                crate::geo::EnuOffset::new(half(bathymetry.ncols()), half(bathymetry.nrows())),
            )
            .map_err(|e| Failure::Invalid(format!("grid centre: {e}")))?
        }
    };

    let cfg = SimConfig {
        mission,
        bathymetry,
        suite: rc.suite,
        power: rc.power,
        vehicle: rc.vehicle,
        gains: rc.gains,
        seed: seed.unwrap_or(rc.seed),
        noise_enabled: noise.map_or(rc.noise, |s| s == Switch::On),
        start_pos: start,
        start_heading: rc.start_heading,
    };

    let file = fs::File::create(log_path)
        .map_err(|e| Failure::Io(format!("{}: {e}", log_path.display())))?;
    let io_fail = |e: io::Error| Failure::Io(format!("{}: {e}", log_path.display()));
    let mut writer = LogWriter::new(file).map_err(io_fail)?;
    let run = sim::run_mission_logged(&cfg, &mut writer).map_err(|e| match e {
        SimError::Io(e) => io_fail(e),
        other => Failure::Invalid(other.to_string()),
    })?;

    let status = match &run.termination {
        Termination::Completed => "completed",
        Termination::NavTimeout { .. } => "nav_timeout",
        Termination::BatteryDepleted => "battery_depleted",
        Termination::SensorFault { .. } => "sensor_fault",
    };
    let last = run
        .trajectory
        .last()
        .expect("trajectory starts with the initial state");
    writeln!(
        out,
        "status={status} records={} time_s={:.1} odometer_m={:.2} battery_ah={:.4}",
        run.records.len(),
        last.time_s,
        last.odometer_m,
        last.battery_ah
    )
    .map_err(stdout_err)?;

    match run.termination {
        Termination::Completed => Ok(()),
        t => Err(Failure::Runtime(format!("mission ended early: {t}"))),
    }
}

fn cmd_analyze(
    log_path: &Path,
    dims: Option<(f64, f64)>,
    reference: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let records = load_log(log_path)?;
    let reference = match reference {
        Some(p) => Some(group_by_test(&load_log(p)?)),
        None => None,
    };

    let mut header =
        String::from("test,n_points,avg_depth_cm,min_depth_cm,max_depth_cm,path_length_m");
    if dims.is_some() {
        header.push_str(",capacity_m3");
    }
    if reference.is_some() {
        header.push_str(",silting_ratio");
    }
    writeln!(out, "{header}").map_err(stdout_err)?;

    for (_, group) in group_by_test(&records) {
        let s = summarize(&group).map_err(|e| Failure::Invalid(e.to_string()))?;
        let mut line = format!(
            "{},{},{:.2},{},{},{:.2}",
            s.test_id, s.n_points, s.avg_depth_cm, s.min_depth_cm, s.max_depth_cm, s.path_length_m
        );
        if let Some((length, width)) = dims {
            // log depths are centimetres, capacity wants metres
            let cap = capacity_estimate(length, width, s.avg_depth_cm / 100.0)
                .map_err(|e| Failure::Invalid(e.to_string()))?;
            line.push_str(&format!(",{cap:.2}"));
        }
        if let Some(groups) = &reference {
            line.push(',');
            if let Some((_, old)) = groups.iter().find(|(t, _)| *t == s.test_id) {
                let old = summarize(old).map_err(|e| Failure::Invalid(e.to_string()))?;
                let ratio = analytics::silting_ratio(&old, &s)
                    .map_err(|e| Failure::Invalid(e.to_string()))?;
                line.push_str(&format!("{ratio:.4}"));
            }
        }
        writeln!(out, "{line}").map_err(stdout_err)?;
    }
    Ok(())
}

fn cmd_plot(
    log_path: &Path,
    out_path: &Path,
    format: PlotFormat,
    test: Option<u32>,
    out: &mut dyn Write,
) -> CmdResult {
    let records: Vec<LogRecord> = load_log(log_path)?
        .into_iter()
        .filter(|r| test.is_none_or(|t| r.test_id == t))
        .collect();
    if records.is_empty() {
        return Err(Failure::Invalid("nothing to plot".into()));
    }
    let groups = group_by_test(&records);
    let series: Vec<(u32, Vec<(u32, u32)>)> = groups
        .iter()
        .map(|(t, g)| depth_profile(g).map(|s| (*t, s)))
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Invalid(e.to_string()))?;

    let body = match format {
        PlotFormat::Csv => {
            if series.len() > 1 {
                let ids: Vec<String> = series.iter().map(|(t, _)| t.to_string()).collect();
                return Err(Failure::Invalid(format!(
                    "log holds tests {}; choose one with --test",
                    ids.join(", ")
                )));
            }
            plot::profile_csv(&series[0].1)
        }
        PlotFormat::Svg => plot::profile_svg(&series),
    };
    write_file(out_path, &body)?;
    writeln!(
        out,
        "tests={} points={} out={}",
        series.len(),
        records.len(),
        out_path.display()
    )
    .map_err(stdout_err)
}

fn cmd_check_design(
    components: &Path,
    config_path: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let text = read(components)?;
    let rc = load_config(config_path)?;
    let budget = MassBudget::parse(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", components.display())))?;
    if budget.components.is_empty() {
        return Err(Failure::Invalid(format!(
            "{}: no components listed",
            components.display()
        )));
    }

    let total = vehicle::mass_total(&budget);
    writeln!(out, "components={}", budget.components.len()).map_err(stdout_err)?;
    writeln!(out, "total_mass_g={total:.1}").map_err(stdout_err)?;
    writeln!(out, "displacement_cm3={:.1}", rc.hull.displacement_cm3()).map_err(stdout_err)?;

    let mut problems = Vec::new();
    match vehicle::buoyancy_fraction(&rc.hull, total) {
        Ok(f) => writeln!(out, "buoyancy_fraction={f:.4}").map_err(stdout_err)?,
        Err(VehicleError::WouldSink { fraction }) => {
            writeln!(out, "buoyancy_fraction={fraction:.4}").map_err(stdout_err)?;
            problems.push(format!("would sink: load is {fraction:.3} of displacement"));
        }
        Err(e) => return Err(Failure::Invalid(e.to_string())),
    }

    let pm = &rc.power;
    let full = pm.idle_current_a + pm.motor_full_current_a;
    writeln!(out, "full_throttle_current_a={full:.2}").map_err(stdout_err)?;
    writeln!(out, "hbridge_limit_a={:.2}", pm.hbridge_limit_a).map_err(stdout_err)?;
    if let Err(e) = vehicle::current_draw(ActuatorCommand::new(0.0, 1.0), pm) {
        problems.push(e.to_string());
    }

    let status = if problems.is_empty() { "ok" } else { "fail" };
    writeln!(out, "status={status}").map_err(stdout_err)?;
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(problems.join("; ")))
    }
}

fn cmd_nmea(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let text = read(path)?;
    let (mut fixes, mut skipped, mut invalid) = (0usize, 0usize, 0usize);
    writeln!(out, "lat,lon").map_err(stdout_err)?;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_nmea_sentence(line) {
            Ok(NmeaSentence::Fix { fix, .. }) if fix.valid => {
                fixes += 1;
                writeln!(out, "{:.6},{:.6}", fix.point.lat_deg, fix.point.lon_deg)
                    .map_err(stdout_err)?;
            }
            Ok(NmeaSentence::Fix { .. }) => invalid += 1,
            Ok(NmeaSentence::Skipped(_)) => skipped += 1,
            Err(e) => {
                invalid += 1;
                let _ = writeln!(err, "line {}: {e}", i + 1);
            }
        }
    }
    let _ = writeln!(err, "fixes={fixes} skipped={skipped} invalid={invalid}");
    if fixes == 0 {
        return Err(Failure::Invalid(format!(
            "{}: no valid position fixes",
            path.display()
        )));
    }
    Ok(())
}

fn cmd_validate(path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let mission = Mission::parse(&read(path)?)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let violations = validate_mission(&mission);
    for w in mission.warnings(crate::sensors::SensorSuite::default().gps_cell_m) {
        let _ = writeln!(err, "warning: {w}");
    }
    if violations.is_empty() {
        writeln!(out, "ok: {} waypoints", mission.waypoints.len()).map_err(stdout_err)?;
        return Ok(());
    }
    for v in &violations {
        writeln!(out, "{v}").map_err(stdout_err)?;
    }
    Err(Failure::Invalid(format!(
        "{}: {} violation(s)",
        path.display(),
        violations.len()
    )))
}
