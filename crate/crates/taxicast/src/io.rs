//! Event CSV formats and timestamp handling.
//!
//! Schema A is `user_id,timestamp_iso8601,lat,lon`. Schema B is the 2016
//! NYC yellow-taxi trip file; only `tpep_pickup_datetime`,
//! `pickup_longitude` and `pickup_latitude` are read, located by header
//! name, and there is no user id.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use taxicast_core::demand::DemandEvent;

use crate::config::Schema;
use crate::error::{Error, Result};

/// `YYYY-MM-DDTHH:MM:SSZ`.
pub fn format_timestamp(ts: i64) -> String {
    match DateTime::from_timestamp(ts, 0) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
        None => ts.to_string(),
    }
}

/// RFC 3339 with any offset, or a naive `YYYY-MM-DD[ T]HH:MM:SS` read as UTC.
pub fn parse_timestamp(s: &str) -> Result<i64> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp());
    }
    for fmt in ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp());
        }
    }
    Err(Error::Data(format!("unparseable timestamp {s:?}")))
}

/// Counts from reading an event file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadStats {
    pub rows: usize,
    /// Rows with missing, unparseable or impossible fields.
    pub invalid: usize,
}

fn valid_coordinate(lat: f64, lon: f64) -> bool {
    lat.is_finite()
        && lon.is_finite()
        && (-90.0..=90.0).contains(&lat)
        && (-180.0..=180.0).contains(&lon)
        // the NYC files mark missing GPS fixes as 0, 0
        && !(lat == 0.0 && lon == 0.0)
}

pub fn read_events_from<R: Read>(reader: R, schema: Schema) -> Result<(Vec<DemandEvent>, ReadStats)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Data(format!("missing column {name:?}")))
    };
    let (user, time, lat, lon) = match schema {
        Schema::A => (
            Some(find("user_id")?),
            find("timestamp_iso8601")?,
            find("lat")?,
            find("lon")?,
        ),
        Schema::B => (
            None,
            find("tpep_pickup_datetime")?,
            find("pickup_latitude")?,
            find("pickup_longitude")?,
        ),
    };
    let mut events = Vec::new();
    let mut stats = ReadStats::default();
    for rec in rdr.records() {
        let rec = rec?;
        stats.rows += 1;
        let parsed = (|| {
            let ts = parse_timestamp(rec.get(time)?).ok()?;
            let la: f64 = rec.get(lat)?.parse().ok()?;
            let lo: f64 = rec.get(lon)?.parse().ok()?;
            if !valid_coordinate(la, lo) {
                return None;
            }
            let user_id = match user {
                Some(u) => {
                    let v = rec.get(u)?;
                    if v.is_empty() {
                        None
                    } else {
                        Some(v.to_string())
                    }
                }
                None => None,
            };
            Some(DemandEvent {
                timestamp: ts,
                lat: la,
                lon: lo,
                user_id,
            })
        })();
        match parsed {
            Some(e) => events.push(e),
            None => stats.invalid += 1,
        }
    }
    Ok((events, stats))
}

pub fn read_events(path: &Path, schema: Schema) -> Result<(Vec<DemandEvent>, ReadStats)> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_events_from(std::io::BufReader::new(f), schema)
}

pub fn write_events_to<W: Write>(w: W, events: &[DemandEvent]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["user_id", "timestamp_iso8601", "lat", "lon"])?;
    for e in events {
        wtr.write_record([
            e.user_id.as_deref().unwrap_or(""),
            &format_timestamp(e.timestamp),
            &format!("{:.6}", e.lat),
            &format!("{:.6}", e.lon),
        ])?;
    }
    wtr.flush().map_err(|e| Error::Data(e.to_string()))?;
    Ok(())
}

pub fn write_events(path: &Path, events: &[DemandEvent]) -> Result<()> {
    write_events_to(create(path)?, events)
}

/// Buffered file creation with the path in any error.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// A CSV writer over a new file.
pub fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

/// Shortest round-trip decimal for a float; empty for `None`.
pub fn fmt_f64(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}
