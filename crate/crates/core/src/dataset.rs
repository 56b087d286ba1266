//! Reading and writing the four-file challenge dataset layout, plus the
//! train/test split helpers.
//!
//! ```text
//! route_data.json        route id -> metadata + stops (lat, lng, type, zone_id)
//! actual_sequences.json  route id -> {"actual": stop id -> visit position}
//! travel_times.json      route id -> stop id -> stop id -> seconds
//! package_data.json      route id -> stop id -> package id -> package record
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Dimensions, Package, Rating, RouteId, RouteInstance, RouteParts, ScanStatus, Stop, StopId, StopKind,
    TimeWindow, TravelTimeMatrix, ZoneId,
};

pub const ROUTE_DATA: &str = "route_data.json";
pub const ACTUAL_SEQUENCES: &str = "actual_sequences.json";
pub const TRAVEL_TIMES: &str = "travel_times.json";
pub const PACKAGE_DATA: &str = "package_data.json";

#[derive(Debug, Serialize, Deserialize)]
struct RawRoute {
    station_code: String,
    #[serde(rename = "date_YYYY_MM_DD")]
    date: String,
    departure_time_utc: String,
    executor_capacity_cm3: f64,
    #[serde(default)]
    route_score: Option<String>,
    stops: BTreeMap<String, RawStop>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawStop {
    lat: f64,
    lng: f64,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    zone_id: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawActual {
    actual: BTreeMap<String, i64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPackage {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scan_status: Option<String>,
    #[serde(default)]
    time_window: RawWindow,
    planned_service_time_seconds: f64,
    dimensions: RawDims,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawWindow {
    #[serde(default)]
    start_time_utc: Option<String>,
    #[serde(default)]
    end_time_utc: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawDims {
    depth_cm: f64,
    height_cm: f64,
    width_cm: f64,
}

type RawTimes = BTreeMap<String, BTreeMap<String, f64>>;
type RawPackages = BTreeMap<String, BTreeMap<String, RawPackage>>;

/// Result of ingesting a dataset directory: the valid instances plus one
/// validation error per rejected route.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub instances: Vec<RouteInstance>,
    pub errors: Vec<Error>,
}

/// Loads every route of a challenge-format directory. Missing files and
/// malformed JSON are fatal; per-route inconsistencies are collected in
/// [`IngestReport::errors`].
pub fn ingest(dir: &Path) -> Result<IngestReport> {
    let routes: BTreeMap<String, RawRoute> = read_json(&dir.join(ROUTE_DATA))?;
    let mut actuals: BTreeMap<String, RawActual> = read_json(&dir.join(ACTUAL_SEQUENCES))?;
    let mut times: BTreeMap<String, RawTimes> = read_json(&dir.join(TRAVEL_TIMES))?;
    let mut packages: BTreeMap<String, RawPackages> = read_json(&dir.join(PACKAGE_DATA))?;

    let mut report = IngestReport::default();
    for (route_id, raw) in routes {
        let actual = actuals.remove(&route_id);
        let tt = times.remove(&route_id);
        let pk = packages.remove(&route_id).unwrap_or_default();
        match build_instance(&route_id, raw, actual, tt, pk) {
            Ok(inst) => report.instances.push(inst),
            Err(e) => report.errors.push(e),
        }
    }
    Ok(report)
}

fn build_instance(
    route_id: &str,
    raw: RawRoute,
    actual: Option<RawActual>,
    times: Option<RawTimes>,
    packages: RawPackages,
) -> Result<RouteInstance> {
    let invalid = |reason: String| Error::validation(route_id, reason);
    let id = RouteId::new(route_id)?;

    let mut stops = Vec::with_capacity(raw.stops.len());
    for (sid, s) in &raw.stops {
        let kind = match s.kind.as_str() {
            "Station" => StopKind::Depot,
            "Dropoff" => StopKind::Delivery,
            other => return Err(invalid(format!("stop {sid} has unknown type {other:?}"))),
        };
        let zone = match &s.zone_id {
            Some(z) if !z.is_empty() && kind == StopKind::Delivery => Some(ZoneId::new(z.clone())?),
            _ => None,
        };
        stops.push(Stop {
            id: StopId::new(sid.clone()).map_err(|e| invalid(e.to_string()))?,
            lat: s.lat,
            lng: s.lng,
            zone,
            kind,
        });
    }
    // `raw.stops` is a BTreeMap, so `stops` is already in id order.
    let index: HashMap<&str, usize> = raw.stops.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();

    let times = times.ok_or_else(|| invalid("no travel times".into()))?;
    let n = stops.len();
    let mut flat = vec![f64::NAN; n * n];
    for (from, row) in &times {
        let i = *index
            .get(from.as_str())
            .ok_or_else(|| invalid(format!("travel times reference unknown stop {from}")))?;
        for (to, &secs) in row {
            let j = *index
                .get(to.as_str())
                .ok_or_else(|| invalid(format!("travel times reference unknown stop {to}")))?;
            flat[i * n + j] = secs;
        }
    }
    for i in 0..n {
        flat[i * n + i] = 0.0;
    }
    if let Some(k) = flat.iter().position(|v| v.is_nan()) {
        return Err(invalid(format!(
            "travel time {} -> {} missing",
            stops[k / n].id,
            stops[k % n].id
        )));
    }
    let times = TravelTimeMatrix::from_flat(n, flat).map_err(|e| invalid(e.to_string()))?;

    let mut pkgs = Vec::new();
    for (sid, by_id) in packages {
        let stop = StopId::new(sid).map_err(|e| invalid(e.to_string()))?;
        for (pid, p) in by_id {
            let status = match p.scan_status.as_deref() {
                None | Some("DELIVERED") => ScanStatus::Delivered,
                Some("REJECTED") => ScanStatus::Rejected,
                Some("DELIVERY_ATTEMPTED") => ScanStatus::DeliveryAttempted,
                Some(other) => return Err(invalid(format!("package {pid} has unknown status {other:?}"))),
            };
            let time_window = match (p.time_window.start_time_utc, p.time_window.end_time_utc) {
                (Some(start), Some(end)) => Some(TimeWindow { start, end }),
                _ => None,
            };
            pkgs.push(Package {
                id: pid,
                stop: stop.clone(),
                status,
                dims: Dimensions {
                    width: p.dimensions.width_cm,
                    length: p.dimensions.depth_cm,
                    height: p.dimensions.height_cm,
                },
                time_window,
                service_time: p.planned_service_time_seconds,
            });
        }
    }

    let actual = actual.map(|a| {
        let mut pairs: Vec<(i64, String)> = a.actual.into_iter().map(|(k, v)| (v, k)).collect();
        pairs.sort();
        pairs.into_iter().map(|(_, k)| k).collect::<Vec<_>>()
    });
    let actual = actual
        .map(|ids| ids.into_iter().map(StopId::new).collect::<Result<Vec<_>>>())
        .transpose()?;

    let rating = match raw.route_score.as_deref() {
        None => None,
        Some("High") => Some(Rating::High),
        Some("Medium") => Some(Rating::Medium),
        Some("Low") => Some(Rating::Low),
        Some(other) => return Err(invalid(format!("unknown route_score {other:?}"))),
    };

    RouteInstance::new(RouteParts {
        id,
        station: raw.station_code,
        departure: format!("{} {}", raw.date, raw.departure_time_utc),
        capacity: raw.executor_capacity_cm3,
        stops,
        packages: pkgs,
        times,
        actual,
        rating,
    })
}

/// Writes instances in the challenge layout. Re-ingesting the directory
/// yields equal instances.
pub fn write_dataset(dir: &Path, instances: &[RouteInstance]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut routes = BTreeMap::new();
    let mut actuals = BTreeMap::new();
    let mut times = BTreeMap::new();
    let mut packages = BTreeMap::new();

    for inst in instances {
        let rid = inst.id().to_string();
        let (date, time) = inst
            .departure()
            .split_once(' ')
            .map(|(d, t)| (d.to_owned(), t.to_owned()))
            .unwrap_or_else(|| (inst.departure().to_owned(), String::new()));
        let stops = inst
            .stops()
            .iter()
            .map(|s| {
                (
                    s.id.to_string(),
                    RawStop {
                        lat: s.lat,
                        lng: s.lng,
                        kind: match s.kind {
                            StopKind::Depot => "Station".into(),
                            StopKind::Delivery => "Dropoff".into(),
                        },
                        zone_id: s.zone.as_ref().map(|z| z.to_string()),
                    },
                )
            })
            .collect();
        routes.insert(
            rid.clone(),
            RawRoute {
                station_code: inst.station().to_owned(),
                date,
                departure_time_utc: time,
                executor_capacity_cm3: inst.capacity(),
                route_score: inst.rating().map(|r| {
                    match r {
                        Rating::High => "High",
                        Rating::Medium => "Medium",
                        Rating::Low => "Low",
                    }
                    .to_owned()
                }),
                stops,
            },
        );

        if let Some(seq) = inst.actual() {
            let actual = seq
                .as_slice()
                .iter()
                .enumerate()
                .map(|(pos, &s)| (inst.stops()[s].id.to_string(), pos as i64))
                .collect();
            actuals.insert(rid.clone(), RawActual { actual });
        }

        let n = inst.n_stops();
        let mut tt: RawTimes = BTreeMap::new();
        for i in 0..n {
            let row = (0..n)
                .map(|j| (inst.stops()[j].id.to_string(), inst.times().get(i, j)))
                .collect();
            tt.insert(inst.stops()[i].id.to_string(), row);
        }
        times.insert(rid.clone(), tt);

        let mut pk: RawPackages = BTreeMap::new();
        for p in inst.packages() {
            pk.entry(p.stop.to_string()).or_default().insert(
                p.id.clone(),
                RawPackage {
                    scan_status: Some(
                        match p.status {
                            ScanStatus::Delivered => "DELIVERED",
                            ScanStatus::Rejected => "REJECTED",
                            ScanStatus::DeliveryAttempted => "DELIVERY_ATTEMPTED",
                        }
                        .into(),
                    ),
                    time_window: RawWindow {
                        start_time_utc: p.time_window.as_ref().map(|w| w.start.clone()),
                        end_time_utc: p.time_window.as_ref().map(|w| w.end.clone()),
                    },
                    planned_service_time_seconds: p.service_time,
                    dimensions: RawDims {
                        depth_cm: p.dims.length,
                        height_cm: p.dims.height,
                        width_cm: p.dims.width,
                    },
                },
            );
        }
        packages.insert(rid, pk);
    }

    write_json(&dir.join(ROUTE_DATA), &routes)?;
    write_json(&dir.join(ACTUAL_SEQUENCES), &actuals)?;
    write_json(&dir.join(TRAVEL_TIMES), &times)?;
    write_json(&dir.join(PACKAGE_DATA), &packages)?;
    Ok(())
}

/// Reads a JSON file. Bare `NaN` tokens (emitted by some producers of the
/// public data) are read as `null`. Parse errors carry the byte offset in
/// the original file.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json_text(path, &text)
}

pub(crate) fn parse_json_text<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    let (clean, shifts) = replace_nan_tokens(text);
    serde_json::from_str(&clean).map_err(|e| {
        let sanitized = line_col_to_offset(&clean, e.line(), e.column());
        let before = shifts.iter().take_while(|&&p| p < sanitized).count();
        Error::Json {
            path: path.to_path_buf(),
            offset: sanitized.saturating_sub(before),
            message: e.to_string(),
        }
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        offset: 0,
        message: e.to_string(),
    })?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Replaces `NaN` outside string literals with `null`; returns the rewritten
/// text and the rewritten-text offsets where each replacement ends.
fn replace_nan_tokens(text: &str) -> (String, Vec<usize>) {
    if !text.contains("NaN") {
        return (text.to_owned(), Vec::new());
    }
    let bytes = text.as_bytes();
    let mut out = String::with_capacity(text.len() + 16);
    let mut shifts = Vec::new();
    let mut in_string = false;
    let mut escaped = false;
    let mut i = 0;
    let mut last = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
        } else if b == b'"' {
            in_string = true;
        } else if bytes[i..].starts_with(b"NaN") {
            out.push_str(&text[last..i]);
            out.push_str("null");
            shifts.push(out.len());
            i += 3;
            last = i;
            continue;
        }
        i += 1;
    }
    out.push_str(&text[last..]);
    (out, shifts)
}

fn line_col_to_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (k, l) in text.split_inclusive('\n').enumerate() {
        if k + 1 == line {
            return offset + column.saturating_sub(1);
        }
        offset += l.len();
    }
    text.len()
}

/// Keeps the `rating = high` routes, in input order.
pub fn filter_high_quality(instances: Vec<RouteInstance>) -> Vec<RouteInstance> {
    instances.into_iter().filter(|r| r.rating() == Some(Rating::High)).collect()
}

/// Seeded shuffle split. `|train| = round(train_fraction * n)`; both parts
/// are returned sorted by route id.
pub fn split_train_test(
    instances: Vec<RouteInstance>,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<RouteInstance>, Vec<RouteInstance>)> {
    if instances.is_empty() {
        return Err(Error::Empty("cannot split an empty route set"));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} must lie strictly between 0 and 1"
        )));
    }
    let n = instances.len();
    let n_train = (train_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_train = vec![false; n];
    for &i in &order[..n_train] {
        is_train[i] = true;
    }
    let (mut train, mut test): (Vec<_>, Vec<_>) = instances
        .into_iter()
        .zip(is_train)
        .partition(|(_, t)| *t);
    train.sort_by(|a, b| a.0.id().cmp(b.0.id()));
    test.sort_by(|a, b| a.0.id().cmp(b.0.id()));
    Ok((
        train.into_iter().map(|(r, _)| r).collect(),
        test.into_iter().map(|(r, _)| r).collect(),
    ))
}

/// Groups routes by station code (sorted), keeping input order within a group.
pub fn group_by_station(instances: Vec<RouteInstance>) -> BTreeMap<String, Vec<RouteInstance>> {
    let mut groups: BTreeMap<String, Vec<RouteInstance>> = BTreeMap::new();
    for r in instances {
        groups.entry(r.station().to_owned()).or_default().push(r);
    }
    groups
}

/// Per-station train/test split; each station's seed is derived from `seed`
/// and the station's rank in sorted order.
pub fn split_per_station(
    instances: Vec<RouteInstance>,
    train_fraction: f64,
    seed: u64,
) -> Result<BTreeMap<String, (Vec<RouteInstance>, Vec<RouteInstance>)>> {
    group_by_station(instances)
        .into_iter()
        .enumerate()
        .map(|(k, (station, routes))| {
            let derived = seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            split_train_test(routes, train_fraction, derived).map(|s| (station, s))
        })
        .collect()
}

pub fn dataset_files(dir: &Path) -> [PathBuf; 4] {
    [ROUTE_DATA, ACTUAL_SEQUENCES, TRAVEL_TIMES, PACKAGE_DATA].map(|f| dir.join(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_tokens_become_null_outside_strings() {
        let (out, shifts) = replace_nan_tokens(r#"{"a": NaN, "NaN": "x NaN", "b": [NaN]}"#);
        assert_eq!(out, r#"{"a": null, "NaN": "x NaN", "b": [null]}"#);
        assert_eq!(shifts.len(), 2);
    }

    #[test]
    fn malformed_json_reports_original_offset() {
        let text = "{\"a\": NaN, \"b\": ]}";
        let err = parse_json_text::<serde_json::Value>(Path::new("x.json"), text).unwrap_err();
        match err {
            Error::Json { offset, .. } => assert_eq!(&text[offset..offset + 1], "]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn offset_on_later_line() {
        let text = "{\n  \"a\": 1,\n  \"b\": x\n}";
        let err = parse_json_text::<serde_json::Value>(Path::new("x.json"), text).unwrap_err();
        match err {
            Error::Json { offset, .. } => assert_eq!(&text[offset..offset + 1], "x"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
