#![allow(dead_code)]

use hrlp::model::{
    Dimensions, Package, RouteId, RouteInstance, RouteParts, ScanStatus, Stop, StopId, StopKind, TravelTimeMatrix,
    ZoneId,
};

pub fn stop(id: &str, kind: StopKind, zone: Option<&str>) -> Stop {
    Stop {
        id: StopId::new(id).unwrap(),
        lat: 47.6,
        lng: -122.3,
        zone: zone.map(|z| ZoneId::new(z).unwrap()),
        kind,
    }
}

pub fn package(id: &str, at: &str, dims: (f64, f64, f64)) -> Package {
    Package {
        id: id.into(),
        stop: StopId::new(at).unwrap(),
        status: ScanStatus::Delivered,
        dims: Dimensions {
            width: dims.0,
            length: dims.1,
            height: dims.2,
        },
        time_window: None,
        service_time: 0.0,
    }
}

/// Depot D and deliveries A (one 2x3x4 package, zone A-1.1A) and B (three
/// unit packages, zone A-1.2B). Benchmark D, A, B.
///
/// ```text
///       D   A   B
///   D   0  10  20
///   A  30   0   5
///   B  40  15   0
/// ```
pub fn three_stop_fixture() -> RouteInstance {
    let times = TravelTimeMatrix::from_rows(vec![
        vec![0.0, 10.0, 20.0],
        vec![30.0, 0.0, 5.0],
        vec![40.0, 15.0, 0.0],
    ])
    .unwrap();
    RouteInstance::new(RouteParts {
        id: RouteId::new("R").unwrap(),
        station: "S".into(),
        departure: "2018-07-27 15:00:00".into(),
        capacity: 1.0,
        stops: vec![
            stop("D", StopKind::Depot, None),
            stop("A", StopKind::Delivery, Some("A-1.1A")),
            stop("B", StopKind::Delivery, Some("A-1.2B")),
        ],
        packages: vec![
            package("p1", "A", (2.0, 3.0, 4.0)),
            package("p2", "B", (1.0, 1.0, 1.0)),
            package("p3", "B", (1.0, 1.0, 1.0)),
            package("p4", "B", (1.0, 1.0, 1.0)),
        ],
        times,
        actual: Some(["D", "A", "B"].map(|s| StopId::new(s).unwrap()).to_vec()),
        rating: None,
    })
    .unwrap()
}
