//! Typed route instances: stops, packages, travel times and stop sequences.
//!
//! Stops inside a [`RouteInstance`] are kept sorted by [`StopId`], so a stop's
//! index doubles as its lexicographic rank. Every solver in the crate breaks
//! ties by index and therefore by identifier.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Result<Self> {
                let value = value.into();
                if value.is_empty() {
                    return Err(Error::InvalidArgument(concat!(stringify!($name), " must be non-empty").into()));
                }
                Ok(Self(value))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of a stop, unique within its route.
    StopId
);
string_id!(
    /// Identifier of a delivery route.
    RouteId
);
string_id!(
    /// Planning-zone label of the form `X-N.MY`; `X-N` is the main zone.
    ZoneId
);

impl ZoneId {
    /// The `(X, N)` pair of an `X-N.MY` label, or `None` when the label does
    /// not follow that layout.
    pub fn main_zone(&self) -> Option<(&str, &str)> {
        let (head, tail) = self.0.split_once('.')?;
        let (x, n) = head.split_once('-')?;
        let valid_x = !x.is_empty() && x.chars().all(|c| c.is_ascii_alphabetic());
        let valid_n = !n.is_empty() && n.chars().all(|c| c.is_ascii_digit());
        let digits = tail.chars().take_while(|c| c.is_ascii_digit()).count();
        let letters = &tail[digits..];
        let valid_tail = digits > 0
            && !letters.is_empty()
            && letters.chars().all(|c| c.is_ascii_alphabetic());
        (valid_x && valid_n && valid_tail).then_some((x, n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopKind {
    Depot,
    Delivery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub id: StopId,
    pub lat: f64,
    pub lng: f64,
    pub zone: Option<ZoneId>,
    pub kind: StopKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScanStatus {
    Rejected,
    Delivered,
    DeliveryAttempted,
}

/// Package dimensions in centimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub width: f64,
    pub length: f64,
    pub height: f64,
}

impl Dimensions {
    pub fn volume(&self) -> f64 {
        self.width * self.length * self.height
    }
}

/// Delivery window; timestamps are `YYYY-MM-DD HH:MM:SS` strings, which
/// order correctly under string comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: String,
    pub end: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Package {
    pub id: String,
    pub stop: StopId,
    pub status: ScanStatus,
    pub dims: Dimensions,
    pub time_window: Option<TimeWindow>,
    /// Planned service time in seconds.
    pub service_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rating {
    High,
    Medium,
    Low,
}

/// Dense square travel-time matrix in seconds, indexed like the route's stops.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelTimeMatrix {
    n: usize,
    data: Vec<f64>,
}

impl TravelTimeMatrix {
    /// Builds a matrix from row-major data. Entries must be finite and
    /// nonnegative; the diagonal is forced to zero.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidCosts(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_flat(n, data)
    }

    pub fn from_flat(n: usize, mut data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidCosts(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidCosts(format!(
                    "entry ({}, {}) = {v}",
                    k / n,
                    k % n
                )));
            }
        }
        for i in 0..n {
            data[i * n + i] = 0.0;
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.data[from * self.n + to]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Total time of visiting `order` consecutively (no return leg).
    pub fn path_time(&self, order: &[usize]) -> f64 {
        order.windows(2).map(|w| self.get(w[0], w[1])).sum()
    }
}

/// An ordered visit list over a route's stop indices, depot first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StopSequence(Vec<usize>);

impl StopSequence {
    pub fn new(order: Vec<usize>) -> Self {
        Self(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    /// Checks that the sequence starts at `depot` and visits each of
    /// `n_stops` stops exactly once.
    pub fn validate_complete(&self, n_stops: usize, depot: usize) -> Result<()> {
        if self.0.first() != Some(&depot) {
            return Err(Error::InvalidSequence("sequence must start at the depot".into()));
        }
        if self.0.len() != n_stops {
            return Err(Error::InvalidSequence(format!(
                "sequence has {} stops, route has {n_stops}",
                self.0.len()
            )));
        }
        let mut seen = vec![false; n_stops];
        for &s in &self.0 {
            if s >= n_stops {
                return Err(Error::InvalidSequence(format!("stop index {s} out of range")));
            }
            if std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidSequence(format!("stop index {s} repeated")));
            }
        }
        Ok(())
    }
}

/// One delivery route. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteInstance {
    id: RouteId,
    station: String,
    departure: String,
    capacity: f64,
    stops: Vec<Stop>,
    depot: usize,
    packages: Vec<Package>,
    times: TravelTimeMatrix,
    actual: Option<StopSequence>,
    rating: Option<Rating>,
}

/// Unvalidated parts of a [`RouteInstance`].
#[derive(Debug, Clone)]
pub struct RouteParts {
    pub id: RouteId,
    pub station: String,
    pub departure: String,
    pub capacity: f64,
    /// Stops in any order; sorted by id on construction.
    pub stops: Vec<Stop>,
    pub packages: Vec<Package>,
    /// Travel times keyed by position in `stops` as given.
    pub times: TravelTimeMatrix,
    /// Benchmark order as stop ids.
    pub actual: Option<Vec<StopId>>,
    pub rating: Option<Rating>,
}

impl RouteInstance {
    pub fn new(parts: RouteParts) -> Result<Self> {
        let RouteParts {
            id,
            station,
            departure,
            capacity,
            stops,
            mut packages,
            times,
            actual,
            rating,
        } = parts;
        let route = id.as_str().to_owned();
        if times.len() != stops.len() {
            return Err(Error::validation(
                &route,
                format!("travel-time matrix is {0}x{0} for {1} stops", times.len(), stops.len()),
            ));
        }
        if !(capacity.is_finite() && capacity >= 0.0) {
            return Err(Error::validation(&route, format!("capacity {capacity} is invalid")));
        }

        let mut perm: Vec<usize> = (0..stops.len()).collect();
        perm.sort_by(|&a, &b| stops[a].id.cmp(&stops[b].id));
        for w in perm.windows(2) {
            if stops[w[0]].id == stops[w[1]].id {
                return Err(Error::validation(&route, format!("duplicate stop id {}", stops[w[0]].id)));
            }
        }
        let n = stops.len();
        let mut flat = Vec::with_capacity(n * n);
        for &i in &perm {
            for &j in &perm {
                flat.push(times.get(i, j));
            }
        }
        let times = TravelTimeMatrix::from_flat(n, flat)?;
        let mut sorted: Vec<Stop> = perm.iter().map(|&i| stops[i].clone()).collect();

        let depots: Vec<usize> = sorted
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == StopKind::Depot)
            .map(|(i, _)| i)
            .collect();
        if depots.len() != 1 {
            return Err(Error::validation(&route, format!("expected one depot, found {}", depots.len())));
        }
        let depot = depots[0];
        sorted[depot].zone = None;
        for s in &sorted {
            if !(s.lat.is_finite() && s.lng.is_finite()) {
                return Err(Error::validation(&route, format!("stop {} has non-finite coordinates", s.id)));
            }
        }

        let index_of = |sid: &StopId| sorted.binary_search_by(|s| s.id.cmp(sid)).ok();
        for p in &packages {
            if index_of(&p.stop).is_none() {
                return Err(Error::validation(&route, format!("package {} references unknown stop {}", p.id, p.stop)));
            }
            let d = p.dims;
            if !(d.width >= 0.0 && d.length >= 0.0 && d.height >= 0.0) {
                return Err(Error::validation(&route, format!("package {} has negative dimensions", p.id)));
            }
            if let Some(w) = &p.time_window {
                if w.start > w.end {
                    return Err(Error::validation(&route, format!("package {} window ends before it starts", p.id)));
                }
            }
            if !(p.service_time.is_finite() && p.service_time >= 0.0) {
                return Err(Error::validation(&route, format!("package {} has invalid service time", p.id)));
            }
        }
        packages.sort_by(|a, b| (&a.stop, &a.id).cmp(&(&b.stop, &b.id)));

        let actual = match actual {
            None => None,
            Some(ids) => {
                let mut order = Vec::with_capacity(ids.len());
                for sid in &ids {
                    let idx = index_of(sid).ok_or_else(|| {
                        Error::validation(&route, format!("actual sequence references unknown stop {sid}"))
                    })?;
                    order.push(idx);
                }
                let seq = StopSequence::new(order);
                seq.validate_complete(n, depot)
                    .map_err(|e| Error::validation(&route, format!("actual sequence: {e}")))?;
                Some(seq)
            }
        };

        Ok(Self {
            id,
            station,
            departure,
            capacity,
            stops: sorted,
            depot,
            packages,
            times,
            actual,
            rating,
        })
    }

    pub fn id(&self) -> &RouteId {
        &self.id
    }

    /// Station (depot) code the route departs from.
    pub fn station(&self) -> &str {
        &self.station
    }

    pub fn departure(&self) -> &str {
        &self.departure
    }

    /// Vehicle volume capacity in cm³.
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    pub fn n_stops(&self) -> usize {
        self.stops.len()
    }

    pub fn depot(&self) -> usize {
        self.depot
    }

    pub fn packages(&self) -> &[Package] {
        &self.packages
    }

    pub fn times(&self) -> &TravelTimeMatrix {
        &self.times
    }

    pub fn actual(&self) -> Option<&StopSequence> {
        self.actual.as_ref()
    }

    pub fn rating(&self) -> Option<Rating> {
        self.rating
    }

    pub fn stop_index(&self, id: &StopId) -> Option<usize> {
        self.stops.binary_search_by(|s| s.id.cmp(id)).ok()
    }

    /// Delivery stop indices in id order.
    pub fn deliveries(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.stops.len()).filter(move |&i| i != self.depot)
    }

    /// Package count per stop index.
    pub fn package_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.stops.len()];
        for p in &self.packages {
            if let Some(i) = self.stop_index(&p.stop) {
                counts[i] += 1;
            }
        }
        counts
    }

    /// Summed package volume (cm³) per stop index.
    pub fn package_volumes(&self) -> Vec<f64> {
        let mut vols = vec![0.0; self.stops.len()];
        for p in &self.packages {
            if let Some(i) = self.stop_index(&p.stop) {
                vols[i] += p.dims.volume();
            }
        }
        vols
    }

    pub fn sequence_ids(&self, seq: &StopSequence) -> Vec<StopId> {
        seq.as_slice().iter().map(|&i| self.stops[i].id.clone()).collect()
    }

    /// Resolves a list of stop ids into a complete sequence for this route.
    pub fn sequence_from_ids(&self, ids: &[StopId]) -> Result<StopSequence> {
        let order = ids
            .iter()
            .map(|sid| {
                self.stop_index(sid)
                    .ok_or_else(|| Error::InvalidSequence(format!("unknown stop {sid} in route {}", self.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let seq = StopSequence::new(order);
        seq.validate_complete(self.stops.len(), self.depot)?;
        Ok(seq)
    }

    /// Returns a copy with the benchmark sequence replaced.
    pub fn with_actual(&self, actual: StopSequence) -> Result<Self> {
        actual.validate_complete(self.stops.len(), self.depot)?;
        let mut out = self.clone();
        out.actual = Some(actual);
        Ok(out)
    }

    pub fn with_rating(mut self, rating: Option<Rating>) -> Self {
        self.rating = rating;
        self
    }

    /// Returns a copy with every `remove`d stop's zone label cleared.
    pub fn without_zones(&self, remove: &HashSet<usize>) -> Self {
        let mut out = self.clone();
        for &i in remove {
            if let Some(s) = out.stops.get_mut(i) {
                s.zone = None;
            }
        }
        out
    }

    /// Indices of delivery stops that carry no zone label.
    pub fn unzoned_stops(&self) -> Vec<usize> {
        self.deliveries().filter(|&i| self.stops[i].zone.is_none()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zone(s: &str) -> ZoneId {
        ZoneId::new(s).unwrap()
    }

    #[test]
    fn main_zone_parsing() {
        assert_eq!(zone("A-1.2B").main_zone(), Some(("A", "1")));
        assert_eq!(zone("P-12.3C").main_zone(), Some(("P", "12")));
        assert_eq!(zone("A-1").main_zone(), None);
        assert_eq!(zone("A1.2B").main_zone(), None);
        assert_eq!(zone("A-x.2B").main_zone(), None);
        assert_eq!(zone("A-1.B").main_zone(), None);
    }

    #[test]
    fn empty_ids_rejected() {
        assert!(StopId::new("").is_err());
        assert!(RouteId::new("R1").is_ok());
    }

    #[test]
    fn matrix_rejects_negative_and_zeroes_diagonal() {
        assert!(TravelTimeMatrix::from_rows(vec![vec![0.0, -1.0], vec![1.0, 0.0]]).is_err());
        assert!(TravelTimeMatrix::from_rows(vec![vec![0.0, f64::NAN], vec![1.0, 0.0]]).is_err());
        let m = TravelTimeMatrix::from_rows(vec![vec![5.0, 1.0], vec![2.0, 7.0]]).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.get(1, 0), 2.0);
    }

    #[test]
    fn complete_sequence_validation() {
        let seq = StopSequence::new(vec![0, 2, 1]);
        assert!(seq.validate_complete(3, 0).is_ok());
        assert!(seq.validate_complete(3, 1).is_err());
        assert!(StopSequence::new(vec![0, 1, 1]).validate_complete(3, 0).is_err());
        assert!(StopSequence::new(vec![0, 1]).validate_complete(3, 0).is_err());
    }
}
