use std::collections::HashSet;
use std::fs;
use std::path::Path;

use hrlp::dataset::{
    filter_high_quality, ingest, split_per_station, split_train_test, write_dataset, ACTUAL_SEQUENCES,
    PACKAGE_DATA, ROUTE_DATA, TRAVEL_TIMES,
};
use hrlp::model::{Rating, StopId};
use hrlp::synth::{synth_suite, SynthSpec};
use hrlp::Error;
use serde_json::{json, Map, Value};

struct FixtureRoute {
    id: &'static str,
    zones: [Option<&'static str>; 3],
    actual: Vec<&'static str>,
    rating: &'static str,
}

const STOPS: [&str; 3] = ["AA", "BB", "CC"];

fn write_fixture(dir: &Path, routes: &[FixtureRoute]) {
    let mut route_data = Map::new();
    let mut actuals = Map::new();
    let mut times = Map::new();
    let mut packages = Map::new();
    for r in routes {
        let mut stops = Map::new();
        stops.insert("DP".into(), json!({"lat": 47.6, "lng": -122.3, "type": "Station", "zone_id": null}));
        for (k, s) in STOPS.iter().enumerate() {
            stops.insert(
                (*s).into(),
                json!({"lat": 47.6 + 0.01 * (k + 1) as f64, "lng": -122.3, "type": "Dropoff", "zone_id": r.zones[k]}),
            );
        }
        route_data.insert(
            r.id.into(),
            json!({
                "station_code": "DXX1",
                "date_YYYY_MM_DD": "2018-07-27",
                "departure_time_utc": "16:02:10",
                "executor_capacity_cm3": 3313071.0,
                "route_score": r.rating,
                "stops": stops,
            }),
        );
        let order: Map<String, Value> = r.actual.iter().enumerate().map(|(k, s)| ((*s).into(), json!(k))).collect();
        actuals.insert(r.id.into(), json!({ "actual": order }));
        let all: Vec<&str> = std::iter::once("DP").chain(STOPS).collect();
        let mut tt = Map::new();
        for (i, a) in all.iter().enumerate() {
            let row: Map<String, Value> = all
                .iter()
                .enumerate()
                .map(|(j, b)| ((*b).into(), json!(if i == j { 0.0 } else { 60.0 * (i as f64 - j as f64).abs() })))
                .collect();
            tt.insert((*a).into(), Value::Object(row));
        }
        times.insert(r.id.into(), Value::Object(tt));
        let mut pk = Map::new();
        for s in STOPS {
            pk.insert(
                s.into(),
                json!({ format!("PK_{s}"): {
                    "scan_status": "DELIVERED",
                    "time_window": {"start_time_utc": null, "end_time_utc": null},
                    "planned_service_time_seconds": 30.0,
                    "dimensions": {"depth_cm": 10.0, "height_cm": 20.0, "width_cm": 30.0}
                }}),
            );
        }
        packages.insert(r.id.into(), Value::Object(pk));
    }
    for (name, v) in [
        (ROUTE_DATA, route_data),
        (ACTUAL_SEQUENCES, actuals),
        (TRAVEL_TIMES, times),
        (PACKAGE_DATA, packages),
    ] {
        fs::write(dir.join(name), serde_json::to_string_pretty(&Value::Object(v)).unwrap()).unwrap();
    }
}

fn consistent(id: &'static str) -> FixtureRoute {
    FixtureRoute {
        id,
        zones: [Some("A-1.1A"), Some("A-1.1A"), Some("A-1.2B")],
        actual: vec!["DP", "AA", "BB", "CC"],
        rating: "High",
    }
}

#[test]
fn three_consistent_routes() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &[consistent("R1"), consistent("R2"), consistent("R3")]);
    let report = ingest(dir.path()).unwrap();
    assert_eq!(report.instances.len(), 3);
    assert!(report.errors.is_empty());
    let r1 = &report.instances[0];
    assert_eq!(r1.n_stops(), 4);
    assert_eq!(r1.stops()[r1.depot()].id.as_str(), "DP");
    let idx = |s: &str| r1.stop_index(&StopId::new(s).unwrap()).unwrap();
    assert_eq!(r1.times().get(idx("DP"), idx("AA")), 60.0);
    assert_eq!(r1.times().get(idx("CC"), idx("DP")), 180.0);
    assert_eq!(r1.packages().len(), 3);
}

#[test]
fn sequence_omitting_a_stop_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = consistent("R2");
    bad.actual = vec!["DP", "AA", "CC"];
    write_fixture(dir.path(), &[consistent("R1"), bad, consistent("R3")]);
    let report = ingest(dir.path()).unwrap();
    assert_eq!(report.instances.len(), 2);
    assert_eq!(report.errors.len(), 1);
    match &report.errors[0] {
        Error::Validation { route, .. } => assert_eq!(route, "R2"),
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn stop_without_zone_is_kept() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = consistent("R1");
    r.zones[1] = None;
    write_fixture(dir.path(), &[r]);
    let report = ingest(dir.path()).unwrap();
    assert_eq!(report.instances.len(), 1);
    let inst = &report.instances[0];
    let unzoned = inst.unzoned_stops();
    assert_eq!(unzoned.len(), 1);
    assert_eq!(inst.stops()[unzoned[0]].id.as_str(), "BB");
}

#[test]
fn missing_file_is_fatal() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &[consistent("R1")]);
    fs::remove_file(dir.path().join(PACKAGE_DATA)).unwrap();
    assert!(matches!(ingest(dir.path()), Err(Error::MissingFile(_))));
}

#[test]
fn malformed_json_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    write_fixture(dir.path(), &[consistent("R1")]);
    fs::write(dir.path().join(TRAVEL_TIMES), "{\"R1\": [}").unwrap();
    match ingest(dir.path()) {
        Err(Error::Json { offset, .. }) => assert!(offset > 0 && offset <= 9),
        other => panic!("expected a JSON error, got {other:?}"),
    }
}

#[test]
fn ratings_filter() {
    let dir = tempfile::tempdir().unwrap();
    let mut routes = Vec::new();
    for (id, rating) in [("R1", "High"), ("R2", "Medium"), ("R3", "Low"), ("R4", "High"), ("R5", "Medium"), ("R6", "Low")] {
        let mut r = consistent(id);
        r.rating = rating;
        routes.push(r);
    }
    write_fixture(dir.path(), &routes);
    let all = ingest(dir.path()).unwrap().instances;
    let high = filter_high_quality(all.clone());
    let ids: Vec<&str> = high.iter().map(|r| r.id().as_str()).collect();
    assert_eq!(ids, ["R1", "R4"]);
    let medium_only: Vec<_> = all.into_iter().filter(|r| r.rating() == Some(Rating::Medium)).collect();
    assert!(filter_high_quality(medium_only).is_empty());
}

#[test]
fn synthetic_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let routes = synth_suite(&SynthSpec { seed: 5, ..Default::default() }, 4, 2).unwrap();
    write_dataset(dir.path(), &routes).unwrap();
    let back = ingest(dir.path()).unwrap();
    assert!(back.errors.is_empty());
    assert_eq!(back.instances, routes);
}

#[test]
fn split_counts_and_determinism() {
    let routes = synth_suite(&SynthSpec { n_zones: 1, stops_per_zone: (1, 2), ..Default::default() }, 10, 1).unwrap();
    let (train, test) = split_train_test(routes.clone(), 0.7, 42).unwrap();
    assert_eq!((train.len(), test.len()), (7, 3));
    let a: HashSet<_> = train.iter().map(|r| r.id().clone()).collect();
    let b: HashSet<_> = test.iter().map(|r| r.id().clone()).collect();
    assert!(a.is_disjoint(&b));
    assert_eq!(a.len() + b.len(), 10);
    let (train2, test2) = split_train_test(routes.clone(), 0.7, 42).unwrap();
    assert_eq!(train, train2);
    assert_eq!(test, test2);
    assert!(split_train_test(Vec::new(), 0.7, 42).is_err());
    assert!(split_train_test(routes, 1.0, 42).is_err());
}

#[test]
fn rounding_on_full_corpus_size() {
    let n: usize = 2718;
    let n_train = (0.7 * n as f64).round() as usize;
    assert_eq!((n_train, n - n_train), (1903, 815));
}

#[test]
fn per_station_split_covers_input() {
    let routes = synth_suite(&SynthSpec { n_zones: 1, stops_per_zone: (1, 1), ..Default::default() }, 12, 3).unwrap();
    let splits = split_per_station(routes, 0.7, 1).unwrap();
    assert_eq!(splits.len(), 3);
    let total: usize = splits.values().map(|(a, b)| a.len() + b.len()).sum();
    assert_eq!(total, 12);
    for (station, (train, test)) in &splits {
        assert_eq!(train.len(), 3);
        assert_eq!(test.len(), 1);
        assert!(train.iter().chain(test).all(|r| r.station() == station));
    }
}
