//! Zone partitions, pairwise zone and stop features, and the weighted cost
//! matrices built from them.
//!
//! Zone-level problems use node 0 for the depot pseudo-zone and node `k`
//! for the `k`-th zone in identifier order.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RouteInstance, ZoneId};
use crate::routing::CostMatrix;
use crate::synth::EARTH_RADIUS_M;

pub const THETA_MIN: f64 = 1.0;
pub const THETA_MAX: f64 = 10.0;
pub const N_ZONE_FEATURES: usize = 5;
pub const N_STOP_FEATURES: usize = 4;

/// Label given to every stop when the single-zone fallback is used.
pub const FALLBACK_ZONE: &str = "Z-0.0A";

/// Feature weights, each within `[THETA_MIN, THETA_MAX]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Theta<const K: usize>([f64; K]);

pub type ThetaVector = Theta<N_ZONE_FEATURES>;
pub type StopTheta = Theta<N_STOP_FEATURES>;

impl<const K: usize> Theta<K> {
    pub fn new(values: [f64; K]) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !(THETA_MIN..=THETA_MAX).contains(&value) {
                return Err(Error::ThetaOutOfBounds {
                    index,
                    value,
                    lo: THETA_MIN,
                    hi: THETA_MAX,
                });
            }
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; K] = values
            .try_into()
            .map_err(|_| Error::InvalidArgument(format!("expected {K} weights, got {}", values.len())))?;
        Self::new(arr)
    }

    pub fn values(&self) -> &[f64; K] {
        &self.0
    }

    /// Parses `"5,2,1,1,1"`.
    pub fn parse_inline(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad weight {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_slice(&values)
    }
}

impl<const K: usize> TryFrom<Vec<f64>> for Theta<K> {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::from_slice(&v)
    }
}

impl<const K: usize> From<Theta<K>> for Vec<f64> {
    fn from(t: Theta<K>) -> Self {
        t.0.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub id: ZoneId,
    /// Stop indices in id order.
    pub stops: Vec<usize>,
}

/// Disjoint cover of the delivery stops by zones; the depot is kept apart.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonePartition {
    depot: usize,
    zones: Vec<Zone>,
    zone_of: Vec<Option<usize>>,
}

impl ZonePartition {
    pub fn depot(&self) -> usize {
        self.depot
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    /// Zone-level node count: depot pseudo-zone plus zones.
    pub fn n_nodes(&self) -> usize {
        self.zones.len() + 1
    }

    /// Zone index of a stop; `None` for the depot.
    pub fn zone_of(&self, stop: usize) -> Option<usize> {
        self.zone_of.get(stop).copied().flatten()
    }

    /// Stops of a zone-level node (node 0 is the depot).
    pub fn node_stops(&self, node: usize) -> &[usize] {
        if node == 0 {
            std::slice::from_ref(&self.depot)
        } else {
            &self.zones[node - 1].stops
        }
    }

    /// True when each zone's stops form one uninterrupted block of `seq`
    /// (the depot is ignored).
    pub fn is_contiguous(&self, seq: &[usize]) -> bool {
        let mut closed = vec![false; self.zones.len()];
        let mut current: Option<usize> = None;
        for &s in seq {
            let Some(z) = self.zone_of(s) else { continue };
            if current != Some(z) {
                if closed[z] {
                    return false;
                }
                if let Some(prev) = current {
                    closed[prev] = true;
                }
                current = Some(z);
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PartitionOptions {
    /// Route instances without any zone label as one zone instead of failing.
    pub single_zone_fallback: bool,
}

/// Groups delivery stops by zone label. Unlabelled stops join the zone of
/// their nearest labelled stop by travel time (ties to the smaller zone id).
pub fn build_partition(instance: &RouteInstance, opts: PartitionOptions) -> Result<ZonePartition> {
    let n = instance.n_stops();
    let times = instance.times();
    let labelled: Vec<usize> = instance
        .deliveries()
        .filter(|&i| instance.stops()[i].zone.is_some())
        .collect();
    let mut labels: Vec<Option<ZoneId>> = instance.stops().iter().map(|s| s.zone.clone()).collect();

    let unzoned = instance.unzoned_stops();
    if !unzoned.is_empty() {
        if labelled.is_empty() {
            if !opts.single_zone_fallback {
                return Err(Error::NoZonedStops);
            }
            let z = ZoneId::new(FALLBACK_ZONE)?;
            for &u in &unzoned {
                labels[u] = Some(z.clone());
            }
        } else {
            for &u in &unzoned {
                let best = labelled
                    .iter()
                    .map(|&v| (times.get(u, v), instance.stops()[v].zone.as_ref().expect("labelled")))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)))
                    .expect("labelled stops exist");
                labels[u] = Some(best.1.clone());
            }
        }
    }

    let mut groups: BTreeMap<ZoneId, Vec<usize>> = BTreeMap::new();
    for i in instance.deliveries() {
        groups.entry(labels[i].clone().expect("every delivery labelled")).or_default().push(i);
    }
    let mut zone_of = vec![None; n];
    let zones: Vec<Zone> = groups
        .into_iter()
        .enumerate()
        .map(|(k, (id, stops))| {
            for &s in &stops {
                zone_of[s] = Some(k);
            }
            Zone { id, stops }
        })
        .collect();
    Ok(ZonePartition {
        depot: instance.depot(),
        zones,
        zone_of,
    })
}

/// `K` features for every ordered node pair, min-max normalized per route.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures<const K: usize> {
    n: usize,
    values: Vec<[f64; K]>,
}

pub type ZoneFeatureTensor = PairFeatures<N_ZONE_FEATURES>;
pub type StopFeatureTensor = PairFeatures<N_STOP_FEATURES>;

impl<const K: usize> PairFeatures<K> {
    /// Normalizes raw off-diagonal values feature by feature to `[0, 1]`;
    /// constant features map to 0 and the diagonal is zero.
    fn normalized(n: usize, mut values: Vec<[f64; K]>) -> Self {
        for k in 0..K {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let v = values[i * n + j][k];
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
            let span = hi - lo;
            for i in 0..n {
                for j in 0..n {
                    let cell = &mut values[i * n + j][k];
                    *cell = if i == j || !(span > 0.0) { 0.0 } else { (*cell - lo) / span };
                }
            }
        }
        Self { n, values }
    }

    pub fn from_normalized(n: usize, values: Vec<[f64; K]>) -> Result<Self> {
        if values.len() != n * n || values.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("features must be square and within [0, 1]".into()));
        }
        Ok(Self { n, values })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64; K] {
        &self.values[i * self.n + j]
    }

    /// `c_ij = sum_k theta_k * phi_k(i, j)`, zero diagonal.
    pub fn cost_matrix(&self, theta: &Theta<K>) -> CostMatrix {
        let w = theta.values();
        CostMatrix::from_fn(self.n, |i, j| self.get(i, j).iter().zip(w).map(|(p, t)| t * p).sum())
            .expect("weighted features are finite and nonnegative")
    }
}

/// ratio with the zero-denominator cells marked for later filling
fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Replaces `None` ratios of feature `k` by the largest defined value.
fn fill_ratios<const K: usize>(n: usize, raw: &mut [[f64; K]], pending: &[Option<f64>], k: usize) {
    let max = (0..n * n)
        .filter(|&c| c / n != c % n)
        .filter_map(|c| pending[c])
        .fold(f64::NEG_INFINITY, f64::max);
    let fill = if max.is_finite() { max } else { 1.0 };
    for (c, v) in pending.iter().enumerate() {
        raw[c][k] = v.unwrap_or(fill);
    }
}

fn project(lat: f64, lng: f64, lat0: f64, lng0: f64) -> (f64, f64) {
    let x = EARTH_RADIUS_M * (lng - lng0).to_radians() * lat0.to_radians().cos();
    let y = EARTH_RADIUS_M * (lat - lat0).to_radians();
    (x, y)
}

static WARNED_MAIN_ZONE: AtomicBool = AtomicBool::new(false);

/// The five zone features for every ordered pair of zone-level nodes:
/// mean stop-to-stop travel time, centroid distance, ratio of mean depot
/// outbound times, ratio of mean depot inbound times, same-main-zone flag.
pub fn zone_features(instance: &RouteInstance, partition: &ZonePartition) -> ZoneFeatureTensor {
    let n = partition.n_nodes();
    let t = instance.times();
    let depot = partition.depot();
    let d = &instance.stops()[depot];
    let (lat0, lng0) = (d.lat, d.lng);

    let mean = |xs: &mut dyn Iterator<Item = f64>| {
        let (s, c) = xs.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
        if c == 0 {
            0.0
        } else {
            s / c as f64
        }
    };

    let mut centroid = Vec::with_capacity(n);
    let mut from_depot = Vec::with_capacity(n);
    let mut to_depot = Vec::with_capacity(n);
    let mut main_zone = Vec::with_capacity(n);
    for node in 0..n {
        let stops = partition.node_stops(node);
        let pts: Vec<(f64, f64)> = stops
            .iter()
            .map(|&s| project(instance.stops()[s].lat, instance.stops()[s].lng, lat0, lng0))
            .collect();
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        centroid.push((cx, cy));
        from_depot.push(mean(&mut stops.iter().map(|&s| t.get(depot, s))));
        to_depot.push(mean(&mut stops.iter().map(|&s| t.get(s, depot))));
        main_zone.push(if node == 0 {
            None
        } else {
            let id = &partition.zones()[node - 1].id;
            let parsed = id.main_zone();
            if parsed.is_none() && !WARNED_MAIN_ZONE.swap(true, Ordering::Relaxed) {
                log::warn!("zone id {id} does not follow X-N.MY; treating it as its own main zone");
            }
            parsed.map(|(x, k)| (x.to_owned(), k.to_owned()))
        });
    }

    let mut raw = vec![[0.0; N_ZONE_FEATURES]; n * n];
    let mut phi3 = vec![Some(0.0); n * n];
    let mut phi4 = vec![Some(0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let c = i * n + j;
            let (si, sj) = (partition.node_stops(i), partition.node_stops(j));
            raw[c][0] = mean(&mut si.iter().flat_map(|&u| sj.iter().map(move |&v| t.get(u, v))));
            let (a, b) = (centroid[i], centroid[j]);
            raw[c][1] = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            if i == 0 || j == 0 {
                phi3[c] = Some(1.0);
                phi4[c] = Some(1.0);
            } else {
                phi3[c] = ratio(from_depot[j], from_depot[i]);
                phi4[c] = ratio(to_depot[j], to_depot[i]);
            }
            raw[c][4] = match (&main_zone[i], &main_zone[j]) {
                (Some(x), Some(y)) if x == y => 1.0,
                _ => 0.0,
            };
        }
    }
    fill_ratios(n, &mut raw, &phi3, 2);
    fill_ratios(n, &mut raw, &phi4, 3);
    PairFeatures::normalized(n, raw)
}

pub fn zone_cost_matrix(features: &ZoneFeatureTensor, theta: &ThetaVector) -> CostMatrix {
    features.cost_matrix(theta)
}

/// The four stop features for every ordered pair of stops (depot included):
/// travel time, ratio of depot outbound times, ratio of depot inbound times,
/// ratio of package counts. Ratios on pairs touching the depot are 1.
pub fn stop_features(instance: &RouteInstance) -> StopFeatureTensor {
    let n = instance.n_stops();
    let t = instance.times();
    let depot = instance.depot();
    let pkgs = instance.package_counts();
    let mut raw = vec![[0.0; N_STOP_FEATURES]; n * n];
    let mut f2 = vec![Some(0.0); n * n];
    let mut f3 = vec![Some(0.0); n * n];
    let mut f4 = vec![Some(0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let c = i * n + j;
            raw[c][0] = t.get(i, j);
            if i == depot || j == depot {
                f2[c] = Some(1.0);
                f3[c] = Some(1.0);
                f4[c] = Some(1.0);
            } else {
                f2[c] = ratio(t.get(depot, j), t.get(depot, i));
                f3[c] = ratio(t.get(j, depot), t.get(i, depot));
                f4[c] = ratio(pkgs[j] as f64, pkgs[i] as f64);
            }
        }
    }
    fill_ratios(n, &mut raw, &f2, 1);
    fill_ratios(n, &mut raw, &f3, 2);
    fill_ratios(n, &mut raw, &f4, 3);
    PairFeatures::normalized(n, raw)
}

pub fn stop_cost_matrix(features: &StopFeatureTensor, theta: &StopTheta) -> CostMatrix {
    features.cost_matrix(theta)
}

/// `(from, to, features...)` rows for every ordered pair, for inspection.
pub fn zone_feature_rows(partition: &ZonePartition, features: &ZoneFeatureTensor) -> Vec<(String, String, [f64; 5])> {
    let name = |node: usize| {
        if node == 0 {
            "depot".to_owned()
        } else {
            partition.zones()[node - 1].id.to_string()
        }
    };
    let n = features.len();
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                rows.push((name(i), name(j), *features.get(i, j)));
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RouteId, RouteParts, Stop, StopId, StopKind, TravelTimeMatrix};

    fn instance(zones: &[Option<&str>], rows: Vec<Vec<f64>>) -> RouteInstance {
        let stops = zones
            .iter()
            .enumerate()
            .map(|(i, z)| Stop {
                id: StopId::new(format!("S{i}")).unwrap(),
                lat: 47.6 + 0.001 * i as f64,
                lng: -122.3,
                zone: z.map(|z| ZoneId::new(z).unwrap()),
                kind: if i == 0 { StopKind::Depot } else { StopKind::Delivery },
            })
            .collect();
        RouteInstance::new(RouteParts {
            id: RouteId::new("R").unwrap(),
            station: "ST".into(),
            departure: "2018-01-01 00:00:00".into(),
            capacity: 1.0,
            stops,
            packages: vec![],
            times: TravelTimeMatrix::from_rows(rows).unwrap(),
            actual: None,
            rating: None,
        })
        .unwrap()
    }

    fn sym(n: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { f(i.min(j), i.max(j)) }).collect()).collect()
    }

    #[test]
    fn theta_bounds() {
        assert!(ThetaVector::new([1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
        assert!(ThetaVector::new([1.0, 10.0, 1.0, 1.0, 1.0]).is_ok());
        assert_eq!(ThetaVector::parse_inline("5, 2,1,1,1").unwrap().values(), &[5.0, 2.0, 1.0, 1.0, 1.0]);
        assert!(ThetaVector::parse_inline("5,2,1").is_err());
    }

    #[test]
    fn fully_zoned_partition() {
        let inst = instance(&[None, Some("A-1.1A"), Some("A-1.1A"), Some("B-2.1A")], sym(4, |i, j| (i + j) as f64));
        let p = build_partition(&inst, PartitionOptions::default()).unwrap();
        assert_eq!(p.n_zones(), 2);
        assert_eq!(p.zones()[0].stops, vec![1, 2]);
        assert_eq!(p.zones()[1].stops, vec![3]);
        assert_eq!(p.zone_of(0), None);
    }

    #[test]
    fn unzoned_stop_joins_nearest() {
        // stop 3 is 1s from stop 1 (zone A) and 5s from stop 2 (zone B)
        let times = sym(4, |i, j| match (i, j) {
            (1, 3) => 1.0,
            (2, 3) => 5.0,
            _ => 10.0,
        });
        let inst = instance(&[None, Some("A-1.1A"), Some("B-1.1A"), None], times);
        let p = build_partition(&inst, PartitionOptions::default()).unwrap();
        assert_eq!(p.zones()[0].stops, vec![1, 3]);
    }

    #[test]
    fn unzoned_tie_goes_to_smaller_zone_id() {
        let times = sym(4, |i, j| if j == 3 && i > 0 { 2.0 } else { 10.0 });
        let inst = instance(&[None, Some("B-1.1A"), Some("A-1.1A"), None], times);
        let p = build_partition(&inst, PartitionOptions::default()).unwrap();
        let a = p.zones().iter().find(|z| z.id.as_str() == "A-1.1A").unwrap();
        assert_eq!(a.stops, vec![2, 3]);
    }

    #[test]
    fn all_unzoned_requires_fallback() {
        let inst = instance(&[None, None, None], sym(3, |_, _| 1.0));
        assert!(matches!(build_partition(&inst, PartitionOptions::default()), Err(Error::NoZonedStops)));
        let p = build_partition(&inst, PartitionOptions { single_zone_fallback: true }).unwrap();
        assert_eq!(p.n_zones(), 1);
        assert_eq!(p.zones()[0].stops, vec![1, 2]);
    }

    #[test]
    fn singleton_zone_mean_is_pair_time() {
        // depot, a in zone A, b in zone B; t(a,b)=7 is the largest zone-pair time
        let times = vec![vec![0.0, 3.0, 4.0], vec![3.0, 0.0, 7.0], vec![4.0, 5.0, 0.0]];
        let inst = instance(&[None, Some("A-1.1A"), Some("B-1.1A")], times);
        let p = build_partition(&inst, PartitionOptions::default()).unwrap();
        let f = zone_features(&inst, &p);
        // raw phi1 over pairs: (0,1)=3 (0,2)=4 (1,0)=3 (1,2)=7 (2,0)=4 (2,1)=5
        assert_eq!(f.get(1, 2)[0], 1.0);
        assert_eq!(f.get(0, 1)[0], 0.0);
        assert!((f.get(2, 1)[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn main_zone_flag() {
        let times = sym(4, |i, j| (i + j) as f64);
        let inst = instance(&[None, Some("A-1.2B"), Some("A-1.3C"), Some("A-2.2B")], times);
        let p = build_partition(&inst, PartitionOptions::default()).unwrap();
        let f = zone_features(&inst, &p);
        // nodes: 0 depot, 1 A-1.2B, 2 A-1.3C, 3 A-2.2B
        assert_eq!(f.get(1, 2)[4], 1.0);
        assert_eq!(f.get(2, 1)[4], 1.0);
        assert_eq!(f.get(1, 3)[4], 0.0);
        assert_eq!(f.get(0, 1)[4], 0.0);
    }

    #[test]
    fn constant_feature_normalizes_to_zero() {
        let f = PairFeatures::<2>::normalized(3, vec![[5.0, 1.0]; 9]);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.get(i, j)[0], 0.0);
            }
        }
    }

    #[test]
    fn weighted_cost_sum() {
        let mut values = vec![[0.0; 5]; 4];
        values[1] = [0.5, 0.2, 0.1, 0.1, 1.0];
        let f = ZoneFeatureTensor::from_normalized(2, values).unwrap();
        let c = zone_cost_matrix(&f, &ThetaVector::new([2.0, 1.0, 1.0, 1.0, 3.0]).unwrap());
        assert!((c.get(0, 1) - 4.4).abs() < 1e-12);
        assert_eq!(c.get(1, 0), 0.0);
        let z = zone_cost_matrix(&ZoneFeatureTensor::from_normalized(2, vec![[0.0; 5]; 4]).unwrap(), &ThetaVector::new([1.0; 5]).unwrap());
        assert_eq!(z.get(0, 1), 0.0);
    }

    #[test]
    fn contiguity_predicate() {
        let times = sym(5, |_, _| 1.0);
        let inst = instance(&[None, Some("A-1.1A"), Some("A-1.1A"), Some("B-1.1A"), Some("B-1.1A")], times);
        let p = build_partition(&inst, PartitionOptions::default()).unwrap();
        assert!(p.is_contiguous(&[0, 1, 2, 3, 4]));
        assert!(p.is_contiguous(&[0, 4, 3, 2, 1]));
        assert!(!p.is_contiguous(&[0, 1, 3, 2, 4]));
    }
}
