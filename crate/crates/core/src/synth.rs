//! Synthetic clustered route instances for desk-scale experiments.
//!
//! Zones are planar clusters on a jittered ring whose centre lies
//! `depot_offset_m` from the depot. The benchmark visits the zones in the
//! cheapest angular sweep, finishing on the side nearer the depot, and each
//! zone's stops nearest-neighbour first, so it is zone-contiguous by
//! construction.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    Dimensions, Package, Rating, RouteId, RouteInstance, RouteParts, ScanStatus, Stop, StopId, StopKind,
    StopSequence, TravelTimeMatrix, ZoneId,
};

pub(crate) const EARTH_RADIUS_M: f64 = 6_371_000.0;
const ORIGIN_LAT: f64 = 47.6;
const ORIGIN_LNG: f64 = -122.3;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGeometry {
    /// Distance from the depot to the centre of the zone ring, metres.
    pub depot_offset_m: f64,
    /// Mean distance from the ring centre to zone centres, metres.
    pub ring_radius_m: f64,
    /// Radius of the disc stops are drawn from around each centre, metres.
    pub cluster_radius_m: f64,
    pub speed_mps: f64,
    /// Upper bound of the uniform noise added to each directed travel time, seconds.
    pub noise_s: f64,
}

impl Default for ClusterGeometry {
    fn default() -> Self {
        Self {
            depot_offset_m: 6_000.0,
            ring_radius_m: 2_000.0,
            cluster_radius_m: 1_000.0,
            speed_mps: 8.0,
            noise_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub route_id: String,
    pub station: String,
    pub n_zones: usize,
    /// Inclusive range of stops per zone.
    pub stops_per_zone: (usize, usize),
    pub seed: u64,
    pub geometry: ClusterGeometry,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            route_id: "RouteID_syn_0000".into(),
            station: "SYN1".into(),
            n_zones: 4,
            stops_per_zone: (3, 5),
            seed: 0,
            geometry: ClusterGeometry::default(),
        }
    }
}

pub(crate) fn planar_to_latlng(x: f64, y: f64) -> (f64, f64) {
    let lat = ORIGIN_LAT + (y / EARTH_RADIUS_M).to_degrees();
    let lng = ORIGIN_LNG + (x / (EARTH_RADIUS_M * ORIGIN_LAT.to_radians().cos())).to_degrees();
    (lat, lng)
}

fn stop_codes(rng: &mut ChaCha8Rng, count: usize) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let width = if count > 600 { 3 } else { 2 };
    while out.len() < count {
        let code: String = (0..width).map(|_| (b'A' + rng.gen_range(0..26u8)) as char).collect();
        if seen.insert(code.clone()) {
            out.push(code);
        }
    }
    out
}

fn zone_label(k: usize) -> String {
    format!("S-{}.{}A", k / 2 + 1, k % 2 + 1)
}

/// The cheapest closed sweep of the ring (by centroid distance, depot
/// legs included), oriented so that it ends at whichever end zone is nearer
/// the depot.
fn sweep_order(centres: &[(f64, f64)]) -> Vec<usize> {
    let nz = centres.len();
    let dist = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
    let depot = (0.0, 0.0);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for first in 0..nz {
        for step in [1, nz - 1] {
            let order: Vec<usize> = (0..nz).map(|i| (first + i * step) % nz).collect();
            let mut cost = dist(depot, centres[order[0]]) + dist(centres[order[nz - 1]], depot);
            for w in order.windows(2) {
                cost += dist(centres[w[0]], centres[w[1]]);
            }
            if best.as_ref().map_or(true, |(c, _)| cost < *c - 1e-9) {
                best = Some((cost, order));
            }
        }
    }
    let mut order = best.expect("at least one zone").1;
    if dist(depot, centres[order[0]]) < dist(depot, centres[order[nz - 1]]) {
        order.reverse();
    }
    order
}

/// Generates one clustered instance with a zone-contiguous benchmark.
pub fn synth_instance(spec: &SynthSpec) -> Result<RouteInstance> {
    let (lo, hi) = spec.stops_per_zone;
    if spec.n_zones == 0 {
        return Err(Error::InvalidArgument("n_zones must be at least 1".into()));
    }
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("invalid stops-per-zone range {lo}..={hi}")));
    }
    let g = &spec.geometry;
    if !(g.speed_mps > 0.0) || g.noise_s < 0.0 || g.ring_radius_m < 0.0 || g.cluster_radius_m < 0.0 || g.depot_offset_m < 0.0 {
        return Err(Error::InvalidArgument("geometry parameters must be nonnegative with positive speed".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nz = spec.n_zones;

    // depot at the origin, then zone clusters in angular order
    let mut points: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut zone_of: Vec<Option<usize>> = vec![None];
    let mut centres = Vec::with_capacity(nz);
    let slot = TAU / nz as f64;
    for k in 0..nz {
        let angle = k as f64 * slot + rng.gen_range(-0.25..=0.25) * slot;
        let radius = g.ring_radius_m * rng.gen_range(0.75..=1.25);
        let (cx, cy) = (g.depot_offset_m + radius * angle.cos(), radius * angle.sin());
        centres.push((cx, cy));
        let count = rng.gen_range(lo..=hi);
        for _ in 0..count {
            let r = g.cluster_radius_m * rng.gen::<f64>().sqrt();
            let a = rng.gen::<f64>() * TAU;
            points.push((cx + r * a.cos(), cy + r * a.sin()));
            zone_of.push(Some(k));
        }
    }
    let n = points.len();
    let first = points[0];
    if points.iter().all(|p| *p == first) {
        return Err(Error::DegenerateGeometry("all stops coincide".into()));
    }

    let mut flat = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt();
                let noise = if g.noise_s > 0.0 { rng.gen::<f64>() * g.noise_s } else { 0.0 };
                flat[i * n + j] = d / g.speed_mps + noise;
            }
        }
    }
    let times = TravelTimeMatrix::from_flat(n, flat)?;

    // benchmark over generation indices
    let mut bench = vec![0usize];
    let mut here = 0usize;
    for k in sweep_order(&centres) {
        let mut pending: Vec<usize> = (1..n).filter(|&i| zone_of[i] == Some(k)).collect();
        while !pending.is_empty() {
            let (pos, _) = pending
                .iter()
                .enumerate()
                .min_by(|a, b| times.get(here, *a.1).total_cmp(&times.get(here, *b.1)).then(a.1.cmp(b.1)))
                .expect("non-empty");
            here = pending.swap_remove(pos);
            bench.push(here);
        }
    }

    let codes = stop_codes(&mut rng, n);
    let mut stops = Vec::with_capacity(n);
    let mut packages = Vec::new();
    for i in 0..n {
        let (lat, lng) = planar_to_latlng(points[i].0, points[i].1);
        let id = StopId::new(codes[i].clone())?;
        let kind = if i == 0 { StopKind::Depot } else { StopKind::Delivery };
        stops.push(Stop {
            id: id.clone(),
            lat,
            lng,
            zone: zone_of[i].map(|k| ZoneId::new(zone_label(k))).transpose()?,
            kind,
        });
        if i > 0 {
            for p in 0..rng.gen_range(1..=3) {
                packages.push(Package {
                    id: format!("PackageID_{}_{p}", codes[i]),
                    stop: id.clone(),
                    status: ScanStatus::Delivered,
                    dims: Dimensions {
                        width: rng.gen_range(10.0..50.0),
                        length: rng.gen_range(10.0..50.0),
                        height: rng.gen_range(2.0..40.0),
                    },
                    time_window: None,
                    service_time: rng.gen_range(30.0..120.0),
                });
            }
        }
    }
    let actual = bench.iter().map(|&i| stops[i].id.clone()).collect();

    RouteInstance::new(RouteParts {
        id: RouteId::new(spec.route_id.clone())?,
        station: spec.station.clone(),
        departure: "2018-07-27 15:00:00".into(),
        capacity: 4_000_000.0,
        stops,
        packages,
        times,
        actual: Some(actual),
        rating: Some(Rating::High),
    })
}

/// `n_routes` instances from `base`, with per-route seeds derived from
/// `base.seed` and stations assigned round-robin over `n_stations`.
pub fn synth_suite(base: &SynthSpec, n_routes: usize, n_stations: usize) -> Result<Vec<RouteInstance>> {
    let n_stations = n_stations.max(1);
    (0..n_routes)
        .map(|k| {
            let spec = SynthSpec {
                route_id: format!("RouteID_syn_{k:04}"),
                station: format!("SYN{}", k % n_stations + 1),
                seed: base.seed.wrapping_mul(1_000_003).wrapping_add(k as u64),
                ..base.clone()
            };
            synth_instance(&spec)
        })
        .collect()
}

/// Replaces every benchmark with the sequence `router` produces.
pub fn plant_benchmarks<F>(routes: &[RouteInstance], mut router: F) -> Result<Vec<RouteInstance>>
where
    F: FnMut(&RouteInstance) -> Result<StopSequence>,
{
    routes.iter().map(|r| router(r).and_then(|seq| r.with_actual(seq))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_zone_instance_sizes() {
        let inst = synth_instance(&SynthSpec {
            n_zones: 4,
            stops_per_zone: (3, 5),
            seed: 7,
            ..Default::default()
        })
        .unwrap();
        assert!((13..=21).contains(&inst.n_stops()));
        let zones: BTreeSet<_> = inst.stops().iter().filter_map(|s| s.zone.clone()).collect();
        assert_eq!(zones.len(), 4);
        assert!(inst.actual().is_some());
    }

    #[test]
    fn smallest_instance() {
        let inst = synth_instance(&SynthSpec {
            n_zones: 1,
            stops_per_zone: (1, 1),
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(inst.n_stops(), 2);
        let seq = inst.actual().unwrap().as_slice();
        assert_eq!(seq[0], inst.depot());
        assert_eq!(seq.len(), 2);
    }

    #[test]
    fn coincident_geometry_is_rejected() {
        let spec = SynthSpec {
            geometry: ClusterGeometry {
                depot_offset_m: 0.0,
                ring_radius_m: 0.0,
                cluster_radius_m: 0.0,
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(matches!(synth_instance(&spec), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn noiseless_times_are_metric() {
        for seed in 0..5 {
            let inst = synth_instance(&SynthSpec {
                seed,
                ..Default::default()
            })
            .unwrap();
            let t = inst.times();
            let n = inst.n_stops();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(t.get(i, j), t.get(j, i));
                    for k in 0..n {
                        assert!(t.get(i, k) <= t.get(i, j) + t.get(j, k) + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SynthSpec {
            seed: 11,
            geometry: ClusterGeometry {
                noise_s: 30.0,
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(synth_instance(&spec).unwrap(), synth_instance(&spec).unwrap());
    }
}
