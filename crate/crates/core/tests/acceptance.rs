//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

use std::path::{Path, PathBuf};

use asb_core::analytics::{depth_profile, group_by_test, summarize};
use asb_core::cli;
use asb_core::geo::{
    from_local_enu, haversine_distance, heading_error, initial_bearing, to_local_enu, wrap_heading,
    EnuOffset, GeoPoint, EARTH_RADIUS_M,
};
use asb_core::logfmt::LogWriter;
use asb_core::logfmt::{
    format_log, format_record, parse_log, parse_record, round_depth_cm, LogRecord,
};
use asb_core::nav::Mission;
use asb_core::sensors::{
    nmea_checksum, parse_nmea_sentence, sample_compass, sample_gps, NmeaSentence, RandomStream,
    SensorSuite,
};
use asb_core::sim::{
    depth_at, load_bathymetry, run_mission, run_mission_logged, SimConfig, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["asb"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn value_of<'a>(stdout: &'a str, key: &str) -> Option<&'a str> {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

fn pool_config() -> SimConfig {
    let mission = Mission::parse(&read_fixture("test3_mission.txt")).unwrap();
    let bathy = load_bathymetry(&read_fixture("pool_bathymetry.txt")).unwrap();
    let start = from_local_enu(mission.waypoints[0].point, EnuOffset::new(0.0, -5.0)).unwrap();
    SimConfig::new(mission, bathy, start)
}

type Criterion = (&'static str, fn() -> Outcome);

fn criterion_1() -> Outcome {
    let path = fixture("table1_components.txt");
    let (code, out, _) = run_cli(&["check-design", "--components", path.to_str().unwrap()]);
    let mass = value_of(&out, "total_mass_g");
    let fraction: Option<f64> = value_of(&out, "buoyancy_fraction").and_then(|v| v.parse().ok());
    let pass =
        code == 0 && mass == Some("4929.8") && fraction.is_some_and(|f| (f - 0.499).abs() <= 0.001);
    outcome(
        pass,
        format!("exit {code}, mass {mass:?} g, fraction {fraction:?}"),
    )
}

fn criterion_2() -> Outcome {
    let text = read_fixture("table3.log");
    let records = parse_log(&text).unwrap();
    let groups = group_by_test(&records);
    let find = |t: u32| {
        let (_, g) = groups.iter().find(|(id, _)| *id == t).unwrap();
        summarize(g).unwrap()
    };
    let t1 = find(1);
    let t3 = find(3);
    let pass = records.len() == 12
        && (t1.avg_depth_cm - 17.33).abs() <= 0.01
        && t1.path_length_m == 13.64
        && (t3.avg_depth_cm - 364.33).abs() <= 0.01
        && t3.path_length_m == 36.94
        && format_log(&records) == text;
    outcome(
        pass,
        format!(
            "{} records; test 1 avg {:.2} path {}; test 3 avg {:.2} path {}",
            records.len(),
            t1.avg_depth_cm,
            t1.path_length_m,
            t3.avg_depth_cm,
            t3.path_length_m
        ),
    )
}

/// Great-circle distance by the spherical law of cosines.
fn cosine_law_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dl = (b.lon_deg - a.lon_deg).to_radians();
    let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
    EARTH_RADIUS_M * c.clamp(-1.0, 1.0).acos()
}

fn criterion_3() -> Outcome {
    let centre = GeoPoint::new(33.97, 71.44).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let near = |rng: &mut ChaCha8Rng| loop {
        let (e, n) = (
            rng.random_range(-10_000.0..10_000.0),
            rng.random_range(-10_000.0..10_000.0),
        );
        if f64::hypot(e, n) <= 10_000.0 {
            return from_local_enu(centre, EnuOffset::new(e, n)).unwrap();
        }
    };

    let mut worst_rel = 0.0f64;
    let mut worst_bearing = 0.0f64;
    let mut worst_enu = 0.0f64;
    for _ in 0..100 {
        let a = near(&mut rng);
        let b = near(&mut rng);
        let h = haversine_distance(a, b);
        let o = cosine_law_distance(a, b);
        worst_rel = worst_rel.max((h - o).abs() / o);

        // the reverse-bearing property is stated for pairs under 1 km
        let step = EnuOffset::new(
            rng.random_range(-700.0..700.0),
            rng.random_range(-700.0..700.0),
        );
        let c = from_local_enu(a, step).unwrap();
        let fwd = initial_bearing(a, c).unwrap();
        let rev = initial_bearing(c, a).unwrap();
        let flipped = wrap_heading(rev.degrees() + 180.0).unwrap();
        worst_bearing = worst_bearing.max(heading_error(flipped, fwd).abs());

        let back = from_local_enu(centre, to_local_enu(centre, a).unwrap()).unwrap();
        worst_enu = worst_enu
            .max((back.lat_deg - a.lat_deg).abs())
            .max((back.lon_deg - a.lon_deg).abs());
    }
    let pass = worst_rel <= 1e-3 && worst_bearing <= 0.1 && worst_enu <= 1e-9;
    outcome(
        pass,
        format!(
            "max relative gap {worst_rel:.2e}, max reverse-bearing gap {worst_bearing:.4} deg, \
             max ENU round-trip error {worst_enu:.2e} deg"
        ),
    )
}

/// Start to each measured position, then measured position to the next.
fn stop_leg_sum(cfg: &SimConfig, stops: &[GeoPoint]) -> f64 {
    let mut prev = cfg.start_pos;
    let mut sum = 0.0;
    for &p in stops {
        sum += haversine_distance(prev, p);
        prev = p;
    }
    sum
}

fn criterion_4() -> Outcome {
    let cfg = pool_config();
    let run = run_mission(&cfg).unwrap();
    let mut exact = run.records.len() == 6;
    for (r, t) in run.records.iter().zip(&run.truth) {
        let grid = depth_at(&cfg.bathymetry, t.true_pos).unwrap();
        exact &= grid == t.true_depth_cm && r.depth_cm == round_depth_cm(grid);
    }
    let stops: Vec<GeoPoint> = run.truth.iter().map(|t| t.true_pos).collect();
    let legs = stop_leg_sum(&cfg, &stops);
    let dist = run.records.last().map_or(0.0, |r| r.dist_m);
    let ratio = dist / legs;
    let pass = run.termination == Termination::Completed && exact && (1.0..=1.25).contains(&ratio);
    outcome(
        pass,
        format!(
            "{}, {} records, depths exact: {exact}, distance {dist:.2} m over legs {legs:.2} m (ratio {ratio:.3})",
            run.termination,
            run.records.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut cfg = pool_config();
    cfg.noise_enabled = true;
    let mut completed = 0;
    let mut worst = 0.0f64;
    let mut over = 0;
    for seed in 0..20 {
        cfg.seed = seed;
        let run = run_mission(&cfg).unwrap();
        if run.termination == Termination::Completed && run.records.len() == 6 {
            completed += 1;
        }
        let err = run
            .records
            .iter()
            .zip(&run.truth)
            .map(|(r, t)| (f64::from(r.depth_cm) - t.true_depth_cm).abs())
            .fold(0.0, f64::max);
        if err > 0.5 {
            over += 1;
        }
        worst = worst.max(err);
    }
    let pass = completed == 20 && worst <= 0.5;
    outcome(
        pass,
        format!(
            "{completed}/20 completed, max |logged - truth| {worst:.3} cm, {over} run(s) above 0.5 cm \
             (sensor noise plus whole-cm rounding can reach 0.8 cm)"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut cfg = pool_config();
    cfg.noise_enabled = true;
    cfg.seed = 42;
    let dir = tempfile::tempdir().unwrap();
    let mut logs = Vec::new();
    for name in ["a.log", "b.log"] {
        let path = dir.path().join(name);
        let mut w = LogWriter::new(std::fs::File::create(&path).unwrap()).unwrap();
        run_mission_logged(&cfg, &mut w).unwrap();
        drop(w);
        logs.push(std::fs::read(&path).unwrap());
    }
    let pass = logs[0] == logs[1] && logs[0].len() > 12;
    outcome(
        pass,
        format!(
            "{} and {} bytes, identical: {}",
            logs[0].len(),
            logs[1].len(),
            logs[0] == logs[1]
        ),
    )
}

fn criterion_7() -> Outcome {
    let suite = SensorSuite::default();
    let origin = GeoPoint::new(33.9716, 71.4415).unwrap();
    let cell = suite.gps_cell_m;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut same = true;
    for _ in 0..1000 {
        let (ci, cj) = (rng.random_range(-50i32..50), rng.random_range(-50i32..50));
        let inside = |rng: &mut ChaCha8Rng| {
            let e = (f64::from(ci) + rng.random_range(0.001..0.999)) * cell;
            let n = (f64::from(cj) + rng.random_range(0.001..0.999)) * cell;
            from_local_enu(origin, EnuOffset::new(e, n)).unwrap()
        };
        let (p, q) = (inside(&mut rng), inside(&mut rng));
        let fp = sample_gps(p, origin, &suite, None).unwrap();
        let fq = sample_gps(q, origin, &suite, None).unwrap();
        same &= fp == fq;
    }

    let truth = wrap_heading(90.0).unwrap();
    let mut stream = RandomStream::new(11);
    let errs: Vec<f64> = (0..10_000)
        .map(|_| heading_error(truth, sample_compass(truth, &suite, Some(&mut stream))))
        .collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (errs.len() - 1) as f64;
    let sd = var.sqrt();
    let pass = same && (1.0..=2.0).contains(&sd);
    outcome(
        pass,
        format!("same-cell fixes identical: {same}, compass sd {sd:.3} deg"),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut round_trips = 0;
    for _ in 0..1000 {
        let r = LogRecord::quantized(
            rng.random_range(1..1000),
            rng.random_range(1..1000),
            rng.random_range(-90.0..=90.0),
            rng.random_range(-180.0..=180.0),
            rng.random_range(0..=450),
            rng.random_range(0.0..100_000.0),
        );
        if parse_record(&format_record(&r)).ok() == Some(r) {
            round_trips += 1;
        }
    }

    // checksums and coordinates worked out by hand
    let checksum_ok =
        nmea_checksum("GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,") == 0x47;
    let gga = |s: &str| match parse_nmea_sentence(s) {
        Ok(NmeaSentence::Fix { fix, .. }) if fix.valid => Some(fix.point),
        _ => None,
    };
    let close = |p: Option<GeoPoint>, lat: f64, lon: f64| {
        p.is_some_and(|p| (p.lat_deg - lat).abs() < 1e-9 && (p.lon_deg - lon).abs() < 1e-9)
    };
    let munich = gga("$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47");
    let pool = gga("$GPGGA,123519,3358.2995,N,07126.5244,E,1,08,0.9,350.0,M,-40.0,M,,*6E");
    let south_west = gga("$GPGGA,000000,3000.0000,S,04530.0000,W,1,05,1.0,0.0,M,0.0,M,,*78");
    let rejected =
        parse_nmea_sentence("$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*48")
            .is_err();
    let nmea_ok = checksum_ok
        && close(munich, 48.0 + 7.038 / 60.0, 11.0 + 31.0 / 60.0)
        && close(pool, 33.0 + 58.2995 / 60.0, 71.0 + 26.5244 / 60.0)
        && close(south_west, -30.0, -45.5)
        && rejected;

    let pass = round_trips == 1000 && nmea_ok;
    outcome(
        pass,
        format!("{round_trips}/1000 records round-trip, NMEA oracles: {nmea_ok}"),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("profile.csv");
    let log = fixture("table3_test3.log");
    let (code, _, _) = run_cli(&[
        "plot",
        log.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    let expected = "setpoint,depth_cm\n1,346\n2,345\n3,359\n4,374\n5,382\n6,380\n";
    let records = parse_log(&read_fixture("table3_test3.log")).unwrap();
    let profile = depth_profile(&records).unwrap();
    let reparsed: Vec<(u32, u32)> = csv
        .lines()
        .skip(1)
        .filter_map(|l| {
            let (a, b) = l.split_once(',')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        })
        .collect();
    let pass = code == 0 && csv == expected && reparsed == profile;
    outcome(pass, format!("exit {code}, {} data rows", reparsed.len()))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("1 design check on the component table", criterion_1),
        ("2 published survey log replay", criterion_2),
        ("3 distance oracle and frame properties", criterion_3),
        ("4 closed-loop mission without noise", criterion_4),
        ("5 noisy missions over 20 seeds", criterion_5),
        ("6 deterministic logs", criterion_6),
        ("7 GPS quantization and compass spread", criterion_7),
        ("8 log and NMEA format round trips", criterion_8),
        ("9 depth profile CSV", criterion_9),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let o = check();
        println!(
            "{} criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
