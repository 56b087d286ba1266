//! Train/evaluate harness: per-depot training, scoring of every method on a
//! held-out split, summaries, histograms and the budget sweep.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{standard_tsp, stop_level_bo, stop_level_route, PreparedStops};
use crate::dataset::split_per_station;
use crate::error::{Error, Result};
use crate::learning::{map_items, train_hrlp, BoConfig, HistoryRow, Trained};
use crate::model::{RouteInstance, StopSequence};
use crate::router::{route_prepared, PreparedRoute, RouterConfig};
use crate::scoring::{route_score, ScoreBreakdown, DEFAULT_GAP_PENALTY};
use crate::zones::{PartitionOptions, StopTheta, ThetaVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Tsp,
    Hrlp,
    StopBo,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Tsp, Method::Hrlp, Method::StopBo];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tsp => "tsp",
            Method::Hrlp => "hrlp",
            Method::StopBo => "stop-bo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?} (expected tsp, hrlp or stop-bo)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub router: RouterConfig,
    pub bo: BoConfig,
    pub gap_penalty: f64,
    pub train_fraction: f64,
    pub split_seed: u64,
    pub single_zone_fallback: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            router: RouterConfig::default(),
            bo: BoConfig::default(),
            gap_penalty: DEFAULT_GAP_PENALTY,
            train_fraction: 0.7,
            split_seed: 0,
            single_zone_fallback: false,
        }
    }
}

impl ExperimentConfig {
    pub fn partition(&self) -> PartitionOptions {
        PartitionOptions {
            single_zone_fallback: self.single_zone_fallback,
        }
    }
}

/// Per-station split, merged back into two id-sorted lists.
pub fn split_corpus(
    instances: Vec<RouteInstance>,
    config: &ExperimentConfig,
) -> Result<(Vec<RouteInstance>, Vec<RouteInstance>)> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, (tr, te)) in split_per_station(instances, config.train_fraction, config.split_seed)? {
        train.extend(tr);
        test.extend(te);
    }
    train.sort_by(|a, b| a.id().cmp(b.id()));
    test.sort_by(|a, b| a.id().cmp(b.id()));
    Ok((train, test))
}

fn by_station(instances: &[RouteInstance]) -> BTreeMap<String, Vec<&RouteInstance>> {
    let mut out: BTreeMap<String, Vec<&RouteInstance>> = BTreeMap::new();
    for r in instances {
        out.entry(r.station().to_owned()).or_default().push(r);
    }
    out
}

/// Prepares routes for the hierarchical router, skipping those that cannot
/// be partitioned.
pub fn prepare_routes(instances: &[&RouteInstance], opts: PartitionOptions) -> Vec<PreparedRoute> {
    instances
        .iter()
        .filter_map(|r| match PreparedRoute::new((*r).clone(), opts) {
            Ok(p) => Some(p),
            Err(e) => {
                log::warn!("skipping route {}: {e}", r.id());
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainedModels {
    pub hrlp: BTreeMap<String, Trained<ThetaVector>>,
    pub stop_bo: BTreeMap<String, Trained<StopTheta>>,
}

impl TrainedModels {
    pub fn hrlp_thetas(&self) -> BTreeMap<String, ThetaVector> {
        self.hrlp.iter().map(|(k, t)| (k.clone(), t.theta)).collect()
    }

    pub fn stop_thetas(&self) -> BTreeMap<String, StopTheta> {
        self.stop_bo.iter().map(|(k, t)| (k.clone(), t.theta)).collect()
    }
}

/// Trains one weight vector per station for each learned method.
pub fn train_per_depot(train: &[RouteInstance], methods: &[Method], config: &ExperimentConfig) -> Result<TrainedModels> {
    let mut models = TrainedModels::default();
    for (station, routes) in by_station(train) {
        if methods.contains(&Method::Hrlp) {
            let prepared = prepare_routes(&routes, config.partition());
            if prepared.is_empty() {
                log::warn!("station {station}: no usable training routes");
            } else {
                log::info!("station {station}: tuning zone weights on {} routes", prepared.len());
                let t = train_hrlp(&prepared, &config.router, &config.bo, config.gap_penalty)?;
                models.hrlp.insert(station.clone(), t);
            }
        }
        if methods.contains(&Method::StopBo) {
            let prepared: Vec<PreparedStops> = routes.iter().map(|r| PreparedStops::new((*r).clone())).collect();
            log::info!("station {station}: tuning stop weights on {} routes", prepared.len());
            let t = stop_level_bo(&prepared, &config.bo, config.gap_penalty)?;
            models.stop_bo.insert(station, t);
        }
    }
    Ok(models)
}

/// History rows tagged with their station, in station order.
pub fn tagged_history<T>(trained: &BTreeMap<String, Trained<T>>) -> Vec<(String, HistoryRow)> {
    trained
        .iter()
        .flat_map(|(s, t)| t.outcome.history.iter().map(move |r| (s.clone(), r.clone())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub route_id: String,
    pub station: String,
    pub method: Method,
    pub sd: f64,
    pub erp_n: f64,
    pub erp_e: usize,
    pub route_score: f64,
}

/// Weights used by the learned methods at evaluation time.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalWeights {
    pub hrlp: BTreeMap<String, ThetaVector>,
    pub stop_bo: BTreeMap<String, StopTheta>,
}

fn run_method(
    route: &RouteInstance,
    method: Method,
    weights: &EvalWeights,
    config: &ExperimentConfig,
) -> Result<Option<StopSequence>> {
    let station = route.station();
    match method {
        Method::Tsp => standard_tsp(route).map(Some),
        Method::Hrlp => {
            let Some(theta) = weights.hrlp.get(station) else { return Ok(None) };
            let prepared = PreparedRoute::new(route.clone(), config.partition())?;
            Ok(Some(route_prepared(&prepared, theta, &config.router)?.sequence))
        }
        Method::StopBo => {
            let Some(theta) = weights.stop_bo.get(station) else { return Ok(None) };
            stop_level_route(&PreparedStops::new(route.clone()), theta).map(Some)
        }
    }
}

/// Routes and scores every test route with every method. Rows are ordered
/// by route id, then method.
pub fn evaluate(
    test: &[RouteInstance],
    methods: &[Method],
    weights: &EvalWeights,
    config: &ExperimentConfig,
) -> Result<Vec<EvalRow>> {
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    let stations = by_station(test);
    for m in &methods {
        for s in stations.keys() {
            let missing = match m {
                Method::Tsp => false,
                Method::Hrlp => !weights.hrlp.contains_key(s),
                Method::StopBo => !weights.stop_bo.contains_key(s),
            };
            if missing {
                log::warn!("no {m} weights for station {s}; skipping its routes");
            }
        }
    }

    let mut sorted: Vec<&RouteInstance> = test.iter().collect();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    let per_route = map_items(&sorted, |route| -> Vec<EvalRow> {
        let Some(bench) = route.actual() else {
            log::warn!("route {} has no benchmark; skipped", route.id());
            return Vec::new();
        };
        let ntimes = crate::scoring::normalize_times(route.times());
        methods
            .iter()
            .filter_map(|&m| {
                let scored = run_method(route, m, weights, config).and_then(|seq| {
                    seq.map(|s| route_score(bench.as_slice(), s.as_slice(), &ntimes, config.gap_penalty))
                        .transpose()
                });
                match scored {
                    Ok(Some(ScoreBreakdown { sd, erp_n, erp_e, route_score })) => Some(EvalRow {
                        route_id: route.id().to_string(),
                        station: route.station().to_owned(),
                        method: m,
                        sd,
                        erp_n,
                        erp_e,
                        route_score,
                    }),
                    Ok(None) => None,
                    Err(e) => {
                        log::warn!("route {} with {m}: {e}", route.id());
                        None
                    }
                }
            })
            .collect()
    });
    Ok(per_route.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub station: Option<String>,
    pub method: Method,
    pub n_routes: usize,
    pub mean_score: f64,
}

/// Mean score per method, and per station and method when `per_station`.
pub fn summarize(rows: &[EvalRow], per_station: bool) -> Vec<SummaryRow> {
    let mut acc: BTreeMap<(Option<String>, Method), (usize, f64)> = BTreeMap::new();
    for r in rows {
        let key = (per_station.then(|| r.station.clone()), r.method);
        let e = acc.entry(key).or_default();
        e.0 += 1;
        e.1 += r.route_score;
    }
    acc.into_iter()
        .map(|((station, method), (n, sum))| SummaryRow {
            station,
            method,
            n_routes: n,
            mean_score: sum / n as f64,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width bins over `[lo, hi]`; values above `hi` land in the last bin
/// and values below `lo` in the first.
pub fn histogram(values: &[f64], bins: usize, lo: f64, hi: f64) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = if width > 0.0 { ((v - lo) / width).floor() } else { 0.0 };
        counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo: lo + k as f64 * width,
            hi: lo + (k + 1) as f64 * width,
            count,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub h: usize,
    pub mean_score: f64,
    pub train_seconds: f64,
    pub test_seconds: f64,
    /// Largest per-zone path-solve count seen on the test routes.
    pub max_zone_solves: usize,
}

/// Trains and evaluates the hierarchical router once per budget.
pub fn sweep_h(train: &[RouteInstance], test: &[RouteInstance], hs: &[usize], config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    hs.iter()
        .map(|&h| {
            let cfg = ExperimentConfig {
                router: RouterConfig { h, ..config.router },
                ..config.clone()
            };
            let t0 = Instant::now();
            let models = train_per_depot(train, &[Method::Hrlp], &cfg)?;
            let train_seconds = t0.elapsed().as_secs_f64();
            let weights = EvalWeights {
                hrlp: models.hrlp_thetas(),
                ..Default::default()
            };
            let t1 = Instant::now();
            let rows = evaluate(test, &[Method::Hrlp], &weights, &cfg)?;
            let test_seconds = t1.elapsed().as_secs_f64();
            let mut max_zone_solves = 0;
            for r in test {
                if let (Some(theta), Ok(p)) = (weights.hrlp.get(r.station()), PreparedRoute::new(r.clone(), cfg.partition())) {
                    if let Ok(out) = route_prepared(&p, theta, &cfg.router) {
                        max_zone_solves = out.trace.iter().map(|t| t.solves).max().unwrap_or(0).max(max_zone_solves);
                    }
                }
            }
            let mean_score = if rows.is_empty() {
                f64::NAN
            } else {
                rows.iter().map(|r| r.route_score).sum::<f64>() / rows.len() as f64
            };
            Ok(SweepRow {
                h,
                mean_score,
                train_seconds,
                test_seconds,
                max_zone_solves,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("nn".parse::<Method>().is_err());
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[0.0, 0.05, 0.1, 0.5, 2.0], 4, 0.0, 0.2);
        assert_eq!(h.iter().map(|b| b.count).collect::<Vec<_>>(), vec![1, 1, 1, 2]);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 5);
    }

    #[test]
    fn summary_means() {
        let row = |id: &str, m, s| EvalRow {
            route_id: id.into(),
            station: "A".into(),
            method: m,
            sd: 0.0,
            erp_n: 0.0,
            erp_e: 0,
            route_score: s,
        };
        let rows = vec![row("r1", Method::Tsp, 0.2), row("r2", Method::Tsp, 0.4), row("r1", Method::Hrlp, 0.1)];
        let s = summarize(&rows, false);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].method, Method::Tsp);
        assert!((s[0].mean_score - 0.3).abs() < 1e-12);
    }
}
