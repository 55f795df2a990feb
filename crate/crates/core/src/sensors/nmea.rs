//! NMEA 0183 ingestion for the GGA and RMC sentences.
//!
//! Lines are framed as `$<payload>*hh`. The checksum is optional; when
//! present it must equal the XOR of every byte of the payload.

use thiserror::Error;

use super::GpsFix;
use crate::geo::GeoPoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NmeaError {
    #[error("sentence does not start with '$'")]
    MissingStart,
    #[error("checksum mismatch: sentence says {stated:02X}, payload gives {computed:02X}")]
    Checksum { stated: u8, computed: u8 },
    #[error("malformed {field} field: {value:?}")]
    Field { field: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixSentence {
    Gga,
    Rmc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NmeaSentence {
    Fix {
        kind: FixSentence,
        fix: GpsFix,
    },
    /// A well-formed sentence without position, tagged by its address field.
    Skipped(String),
}

pub fn nmea_checksum(payload: &str) -> u8 {
    payload.bytes().fold(0, |acc, b| acc ^ b)
}

pub fn parse_nmea_sentence(line: &str) -> Result<NmeaSentence, NmeaError> {
    let line = line.trim_end_matches(['\r', '\n']).trim();
    let body = line.strip_prefix('$').ok_or(NmeaError::MissingStart)?;

    let payload = match body.split_once('*') {
        Some((payload, hex)) => {
            let stated = u8::from_str_radix(hex.trim(), 16)
                .ok()
                .filter(|_| hex.trim().len() == 2)
                .ok_or_else(|| field_err("checksum", hex))?;
            let computed = nmea_checksum(payload);
            if stated != computed {
                return Err(NmeaError::Checksum { stated, computed });
            }
            payload
        }
        None => body,
    };

    let fields: Vec<&str> = payload.split(',').collect();
    let address = fields[0];
    if address.len() < 3 || !address.bytes().all(|b| b.is_ascii_alphanumeric()) {
        return Err(field_err("address", address));
    }

    match &address[address.len() - 3..] {
        "GGA" => parse_gga(&fields).map(|fix| NmeaSentence::Fix {
            kind: FixSentence::Gga,
            fix,
        }),
        "RMC" => parse_rmc(&fields).map(|fix| NmeaSentence::Fix {
            kind: FixSentence::Rmc,
            fix,
        }),
        _ => Ok(NmeaSentence::Skipped(address.to_string())),
    }
}

// $--GGA,time,lat,N,lon,E,quality,sats,hdop,alt,M,sep,M,age,station
fn parse_gga(fields: &[&str]) -> Result<GpsFix, NmeaError> {
    let quality = field(fields, 6, "fix quality")?;
    let valid = match quality {
        "" | "0" => false,
        q if q.bytes().all(|b| b.is_ascii_digit()) => true,
        q => return Err(field_err("fix quality", q)),
    };
    position(fields, 2, valid)
}

// $--RMC,time,status,lat,N,lon,E,speed,course,date,magvar,E
fn parse_rmc(fields: &[&str]) -> Result<GpsFix, NmeaError> {
    let valid = match field(fields, 2, "status")? {
        "A" => true,
        "V" | "" => false,
        s => return Err(field_err("status", s)),
    };
    position(fields, 3, valid)
}

fn position(fields: &[&str], at: usize, valid: bool) -> Result<GpsFix, NmeaError> {
    let lat = field(fields, at, "latitude")?;
    let ns = field(fields, at + 1, "N/S indicator")?;
    let lon = field(fields, at + 2, "longitude")?;
    let ew = field(fields, at + 3, "E/W indicator")?;

    if !valid && lat.is_empty() && lon.is_empty() {
        return Ok(GpsFix {
            point: GeoPoint::default(),
            valid: false,
        });
    }

    let mut lat_deg = ddmm_to_degrees(lat, 2, "latitude")?;
    let mut lon_deg = ddmm_to_degrees(lon, 3, "longitude")?;
    match ns {
        "N" => {}
        "S" => lat_deg = -lat_deg,
        other => return Err(field_err("N/S indicator", other)),
    }
    match ew {
        "E" => {}
        "W" => lon_deg = -lon_deg,
        other => return Err(field_err("E/W indicator", other)),
    }

    let point = GeoPoint::new(lat_deg, lon_deg).map_err(|_| field_err("latitude", lat))?;
    Ok(GpsFix { point, valid })
}

/// Converts `dddmm.mmmm` to decimal degrees.
fn ddmm_to_degrees(text: &str, deg_digits: usize, name: &'static str) -> Result<f64, NmeaError> {
    let int_len = text.find('.').unwrap_or(text.len());
    if int_len != deg_digits + 2 || !text.bytes().all(|b| b.is_ascii_digit() || b == b'.') {
        return Err(field_err(name, text));
    }
    let degrees: f64 = text[..deg_digits]
        .parse()
        .map_err(|_| field_err(name, text))?;
    let minutes: f64 = text[deg_digits..]
        .parse()
        .map_err(|_| field_err(name, text))?;
    if minutes >= 60.0 {
        return Err(field_err(name, text));
    }
    Ok(degrees + minutes / 60.0)
}

fn field<'a>(fields: &[&'a str], i: usize, name: &'static str) -> Result<&'a str, NmeaError> {
    fields
        .get(i)
        .copied()
        .ok_or_else(|| field_err(name, "<missing>"))
}

fn field_err(field: &'static str, value: &str) -> NmeaError {
    NmeaError::Field {
        field,
        value: value.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Writes a GGA sentence for a position; test-only counterpart of the parser.
    fn synthesize_gga(lat: f64, lon: f64) -> String {
        fn ddmm(v: f64, width: usize) -> String {
            let micro_minutes = (v.abs() * 60.0 * 1e6).round() as u64;
            let deg = micro_minutes / 60_000_000;
            let rem = micro_minutes % 60_000_000;
            format!(
                "{:0width$}{:02}.{:06}",
                deg,
                rem / 1_000_000,
                rem % 1_000_000,
                width = width
            )
        }
        let payload = format!(
            "GPGGA,123519,{},{},{},{},1,08,0.9,545.4,M,46.9,M,,",
            ddmm(lat, 2),
            if lat < 0.0 { 'S' } else { 'N' },
            ddmm(lon, 3),
            if lon < 0.0 { 'W' } else { 'E' },
        );
        format!("${}*{:02X}", payload, nmea_checksum(&payload))
    }

    #[test]
    fn checksum_examples() {
        assert_eq!(nmea_checksum(""), 0x00);
        assert_eq!(nmea_checksum("A"), 0x41);
        assert_eq!(nmea_checksum("AB"), 0x03);
    }

    #[test]
    fn gga_converts_minutes() {
        let payload = "GPGGA,101500.00,3358.2995,N,07126.5244,E,1,07,1.2,340.0,M,-40.0,M,,";
        let line = format!("${}*{:02X}\r\n", payload, nmea_checksum(payload));
        let NmeaSentence::Fix { kind, fix } = parse_nmea_sentence(&line).unwrap() else {
            panic!("expected a fix");
        };
        assert_eq!(kind, FixSentence::Gga);
        assert!(fix.valid);
        // hand conversion: 33 + 58.2995/60, 71 + 26.5244/60
        assert!((fix.point.lat_deg - 33.971_658_33).abs() < 1e-7);
        assert!((fix.point.lon_deg - 71.442_073_33).abs() < 1e-7);
    }

    #[test]
    fn rmc_applies_hemispheres() {
        let payload = "GPRMC,081836,A,3751.65,S,14507.36,W,000.0,360.0,130998,011.3,E";
        let line = format!("${}*{:02X}", payload, nmea_checksum(payload));
        let NmeaSentence::Fix { kind, fix } = parse_nmea_sentence(&line).unwrap() else {
            panic!("expected a fix");
        };
        assert_eq!(kind, FixSentence::Rmc);
        assert!((fix.point.lat_deg + (37.0 + 51.65 / 60.0)).abs() < 1e-9);
        assert!((fix.point.lon_deg + (145.0 + 7.36 / 60.0)).abs() < 1e-9);
    }

    #[test]
    fn corrupted_checksum_is_rejected() {
        let payload = "GPGGA,101500.00,3358.2995,N,07126.5244,E,1,07,1.2,340.0,M,-40.0,M,,";
        let good = nmea_checksum(payload);
        let line = format!("${}*{:02X}", payload, good ^ 0x01);
        assert_eq!(
            parse_nmea_sentence(&line),
            Err(NmeaError::Checksum {
                stated: good ^ 0x01,
                computed: good
            })
        );
    }

    #[test]
    fn gsv_is_skipped() {
        let payload = "GPGSV,3,1,11,03,03,111,00,04,15,270,00,06,01,010,00,13,06,292,00";
        let line = format!("${}*{:02X}", payload, nmea_checksum(payload));
        assert_eq!(
            parse_nmea_sentence(&line).unwrap(),
            NmeaSentence::Skipped("GPGSV".into())
        );
    }

    #[test]
    fn sentence_without_checksum_is_accepted() {
        let r = parse_nmea_sentence("$GPGGA,1,3358.2995,N,07126.5244,E,1,5,1,1,M,1,M,,");
        assert!(matches!(r, Ok(NmeaSentence::Fix { .. })));
    }

    #[test]
    fn no_fix_sentence_is_invalid() {
        let NmeaSentence::Fix { fix, .. } =
            parse_nmea_sentence("$GPGGA,1,,,,,0,0,,,M,,M,,").unwrap()
        else {
            panic!()
        };
        assert!(!fix.valid);
        let NmeaSentence::Fix { fix, .. } = parse_nmea_sentence("$GPRMC,1,V,,,,,,,,,").unwrap()
        else {
            panic!()
        };
        assert!(!fix.valid);
    }

    #[test]
    fn malformed_fields_name_the_field() {
        let e =
            parse_nmea_sentence("$GPGGA,1,33x8.2995,N,07126.5244,E,1,5,1,1,M,1,M,,").unwrap_err();
        assert!(matches!(
            e,
            NmeaError::Field {
                field: "latitude",
                ..
            }
        ));
        let e =
            parse_nmea_sentence("$GPGGA,1,3358.2995,Q,07126.5244,E,1,5,1,1,M,1,M,,").unwrap_err();
        assert!(matches!(
            e,
            NmeaError::Field {
                field: "N/S indicator",
                ..
            }
        ));
        let e = parse_nmea_sentence("$GPGGA,1,3358.2995,N").unwrap_err();
        assert!(matches!(e, NmeaError::Field { .. }));
        assert_eq!(parse_nmea_sentence("GPGGA,1"), Err(NmeaError::MissingStart));
        let e = parse_nmea_sentence("$GPGGA,1*ZZ").unwrap_err();
        assert!(matches!(
            e,
            NmeaError::Field {
                field: "checksum",
                ..
            }
        ));
    }

    proptest! {
        #[test]
        fn synthesized_gga_round_trips(lat in -89.9..89.9f64, lon in -179.9..179.9f64) {
            let line = synthesize_gga(lat, lon);
            let NmeaSentence::Fix { fix, .. } = parse_nmea_sentence(&line).unwrap() else {
                panic!("expected a fix");
            };
            prop_assert!((fix.point.lat_deg - lat).abs() < 1e-6);
            prop_assert!((fix.point.lon_deg - lon).abs() < 1e-6);
        }
    }
}
