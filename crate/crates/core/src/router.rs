//! Two-level routing: a zone tour, then one open path per zone between
//! chosen entry and exit stops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RouteInstance, StopSequence, TravelTimeMatrix};
use crate::routing::{savings_path, savings_tour, two_opt_path, two_opt_tour, CostMatrix, Path};
use crate::scoring::{normalize_times, NormalizedTimeMatrix};
use crate::zones::{
    build_partition, zone_cost_matrix, zone_features, PartitionOptions, ThetaVector, ZoneFeatureTensor,
    ZonePartition,
};

pub const DEFAULT_BUDGET: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RouterConfig {
    /// Entry and exit candidates kept per zone.
    pub h: usize,
    /// Count the leg from the previous zone's exit when comparing paths.
    pub link_aware: bool,
    /// Polish the zone tour and each zone path with 2-opt.
    pub two_opt: bool,
}

impl Default for RouterConfig {
    fn default() -> Self {
        Self {
            h: DEFAULT_BUDGET,
            link_aware: false,
            two_opt: false,
        }
    }
}

/// Everything about a route that does not depend on the weights.
#[derive(Debug, Clone)]
pub struct PreparedRoute {
    pub instance: RouteInstance,
    pub partition: ZonePartition,
    pub features: ZoneFeatureTensor,
    pub ntimes: NormalizedTimeMatrix,
}

impl PreparedRoute {
    pub fn new(instance: RouteInstance, opts: PartitionOptions) -> Result<Self> {
        let partition = build_partition(&instance, opts)?;
        let features = zone_features(&instance, &partition);
        let ntimes = normalize_times(instance.times());
        Ok(Self {
            instance,
            partition,
            features,
            ntimes,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exit {
    Stop(usize),
    /// The path ends at the depot itself (last zone only).
    Depot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneTrace {
    /// Zone index in the partition.
    pub zone: usize,
    pub entry: usize,
    pub exit: Exit,
    /// Travel time of the chosen path, including the return leg for the last zone.
    pub cost: f64,
    /// Number of path problems solved for this zone.
    pub solves: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOutcome {
    pub sequence: StopSequence,
    /// Zone indices in visiting order.
    pub zone_order: Vec<usize>,
    pub trace: Vec<ZoneTrace>,
}

/// Zone visiting order from the savings tour over weighted zone costs.
pub fn solve_zone_sequence(features: &ZoneFeatureTensor, theta: &ThetaVector, two_opt: bool) -> Result<Vec<usize>> {
    if features.len() < 2 {
        return Ok(Vec::new());
    }
    let costs = zone_cost_matrix(features, theta);
    let mut tour = savings_tour(&costs, 0)?;
    if two_opt {
        two_opt_tour(&costs, &mut tour);
    }
    Ok(tour.order[1..].iter().map(|&node| node - 1).collect())
}

fn mean_time(times: &TravelTimeMatrix, from: &[usize], to: &[usize]) -> f64 {
    let mut sum = 0.0;
    for &u in from {
        for &v in to {
            sum += times.get(u, v);
        }
    }
    sum / (from.len() * to.len()) as f64
}

/// `stops` ranked by `key` ascending, ties by stop index.
fn ranked(stops: &[usize], key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut keyed: Vec<(f64, usize)> = stops.iter().map(|&s| (key(s), s)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, s)| s).collect()
}

/// Ranked entry and exit candidates of a zone, before truncation. Entries
/// are ordered by mean time from `prev` stops, exits by mean time to `next`.
pub fn candidate_rankings(
    times: &TravelTimeMatrix,
    zone_stops: &[usize],
    prev: &[usize],
    next: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    let entries = ranked(zone_stops, |s| mean_time(times, prev, &[s]));
    let exits = ranked(zone_stops, |s| mean_time(times, &[s], next));
    (entries, exits)
}

struct ZonePlan {
    path: Vec<usize>,
    trace: ZoneTrace,
}

fn solve_zone(
    times: &TravelTimeMatrix,
    zone: usize,
    stops: &[usize],
    prev: &[usize],
    next: &[usize],
    last: Option<usize>,
    link_from: Option<usize>,
    config: &RouterConfig,
) -> Result<ZonePlan> {
    if stops.len() == 1 {
        let s = stops[0];
        let ret = last.map_or(0.0, |d| times.get(s, d));
        return Ok(ZonePlan {
            path: vec![s],
            trace: ZoneTrace {
                zone,
                entry: s,
                exit: Exit::Stop(s),
                cost: ret,
                solves: 0,
            },
        });
    }

    let h = config.h.max(1);
    let (entry_rank, exit_rank) = candidate_rankings(times, stops, prev, next);
    let entries = &entry_rank[..h.min(entry_rank.len())];
    let mut exits: Vec<Exit> = exit_rank.iter().take(h).map(|&s| Exit::Stop(s)).collect();
    if last.is_some() {
        exits.push(Exit::Depot);
    }
    let has_pair = entries
        .iter()
        .any(|&a| exits.iter().any(|&b| b != Exit::Stop(a)));
    if !has_pair {
        if let Some(&s) = exit_rank.get(h) {
            exits.push(Exit::Stop(s));
        }
    }

    let local_of = |s: usize| stops.iter().position(|&x| x == s).expect("candidate in zone");
    let inner = CostMatrix::from_times_subset(times, stops);
    let with_depot = last.map(|d| {
        let mut nodes = stops.to_vec();
        nodes.push(d);
        (nodes.clone(), CostMatrix::from_times_subset(times, &nodes))
    });

    let mut best: Option<(f64, Vec<usize>, usize, Exit)> = None;
    let mut solves = 0;
    for &a in entries {
        for &b in &exits {
            let (path, cost) = match b {
                Exit::Stop(b) if b == a => continue,
                Exit::Stop(b) => {
                    let mut p = savings_path(&inner, local_of(a), local_of(b))?;
                    if config.two_opt {
                        two_opt_path(&inner, &mut p);
                    }
                    let c = p.cost(&inner) + last.map_or(0.0, |d| times.get(b, d));
                    (p.order.iter().map(|&k| stops[k]).collect::<Vec<_>>(), c)
                }
                Exit::Depot => {
                    let (nodes, m) = with_depot.as_ref().expect("last zone");
                    let mut p: Path = savings_path(m, local_of(a), stops.len())?;
                    if config.two_opt {
                        two_opt_path(m, &mut p);
                    }
                    let c = p.cost(m);
                    let order: Vec<usize> = p.order[..p.order.len() - 1].iter().map(|&k| nodes[k]).collect();
                    (order, c)
                }
            };
            solves += 1;
            let link = match (config.link_aware, link_from) {
                (true, Some(u)) => times.get(u, a),
                _ => 0.0,
            };
            let total = cost + link;
            if best.as_ref().is_none_or(|(c, ..)| total < *c) {
                best = Some((total, path, a, b));
            }
        }
    }
    let (_, path, entry, exit) = best.ok_or_else(|| Error::InvalidArgument(format!("zone {zone} has no entry/exit pair")))?;
    let cost = match exit {
        Exit::Stop(b) => times.path_time(&path) + last.map_or(0.0, |d| times.get(b, d)),
        Exit::Depot => times.path_time(&path) + times.get(*path.last().expect("nonempty"), last.expect("last")),
    };
    Ok(ZonePlan {
        path,
        trace: ZoneTrace {
            zone,
            entry,
            exit,
            cost,
            solves,
        },
    })
}

/// Routes a prepared instance under weights `theta`.
pub fn route_prepared(route: &PreparedRoute, theta: &ThetaVector, config: &RouterConfig) -> Result<RouteOutcome> {
    let inst = &route.instance;
    let part = &route.partition;
    let times = inst.times();
    let depot = inst.depot();
    let zone_order = solve_zone_sequence(&route.features, theta, config.two_opt)?;

    let mut sequence = Vec::with_capacity(inst.n_stops());
    sequence.push(depot);
    let mut trace = Vec::with_capacity(zone_order.len());
    let depot_slice = [depot];
    for (i, &z) in zone_order.iter().enumerate() {
        let prev: &[usize] = if i == 0 { &depot_slice } else { &part.zones()[zone_order[i - 1]].stops };
        let is_last = i + 1 == zone_order.len();
        let next: &[usize] = if is_last { &depot_slice } else { &part.zones()[zone_order[i + 1]].stops };
        let plan = solve_zone(
            times,
            z,
            &part.zones()[z].stops,
            prev,
            next,
            is_last.then_some(depot),
            sequence.last().copied(),
            config,
        )?;
        sequence.extend(plan.path);
        trace.push(plan.trace);
    }
    let sequence = StopSequence::new(sequence);
    debug_assert!(sequence.validate_complete(inst.n_stops(), depot).is_ok());
    Ok(RouteOutcome {
        sequence,
        zone_order,
        trace,
    })
}

/// Builds the partition and features, then routes.
pub fn route_instance(
    instance: &RouteInstance,
    theta: &ThetaVector,
    config: &RouterConfig,
    opts: PartitionOptions,
) -> Result<RouteOutcome> {
    let prepared = PreparedRoute::new(instance.clone(), opts)?;
    route_prepared(&prepared, theta, config)
}
