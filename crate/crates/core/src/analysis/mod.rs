//! Route difficulty analysis: route-level features, regression of log
//! score, a linear classifier of low- and high-score routes, and per-feature
//! mean-difference tests.

pub mod ols;
pub mod stats;
pub mod svm;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use ols::{ols, RegressionResult};
pub use stats::{welch_t_test, WelchResult};
pub use svm::{classification_report, svm_fit, ClassificationReport, SvmConfig, SvmModel};

use crate::error::{Error, Result};
use crate::model::RouteInstance;
use crate::zones::{build_partition, PartitionOptions};

pub const N_FEATURES: usize = 8;
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "stop_number",
    "actual_seq_cost",
    "depot_first_zone",
    "depot_last_zone",
    "mean_pac_volume",
    "std_pac_volume",
    "std_depot_stops",
    "std_tra_stops",
];
pub const LOW_SCORE: f64 = 0.01;
pub const HIGH_SCORE: f64 = 0.1;

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

/// Unnormalized features of a route with a benchmark sequence. Standard
/// deviations are population deviations over delivery stops.
pub fn raw_features(instance: &RouteInstance) -> Result<[f64; N_FEATURES]> {
    let bench = instance
        .actual()
        .ok_or_else(|| Error::validation(instance.id().as_str(), "no benchmark sequence"))?;
    let t = instance.times();
    let depot = instance.depot();
    let seq = bench.as_slice();
    let deliveries: Vec<usize> = instance.deliveries().collect();

    let mut cost = t.path_time(seq);
    if let Some(&last) = seq.last() {
        cost += t.get(last, depot);
    }

    let partition = build_partition(instance, PartitionOptions { single_zone_fallback: true })?;
    let zone_mean = |stop: Option<&usize>| -> f64 {
        stop.and_then(|&s| partition.zone_of(s))
            .map(|z| {
                let stops = &partition.zones()[z].stops;
                stops.iter().map(|&s| t.get(depot, s)).sum::<f64>() / stops.len() as f64
            })
            .unwrap_or(0.0)
    };
    let first = zone_mean(seq.iter().find(|&&s| s != depot));
    let last = zone_mean(seq.iter().rev().find(|&&s| s != depot));

    let volumes = instance.package_volumes();
    let vol: Vec<f64> = deliveries.iter().map(|&s| volumes[s]).collect();
    let (mv, sv) = mean_std(&vol);
    let (_, sd_depot) = mean_std(&deliveries.iter().map(|&s| t.get(depot, s)).collect::<Vec<_>>());
    let pair_times: Vec<f64> = deliveries
        .iter()
        .flat_map(|&i| deliveries.iter().filter(move |&&j| j != i).map(move |&j| t.get(i, j)))
        .collect();
    let (_, sd_tra) = mean_std(&pair_times);

    Ok([deliveries.len() as f64, cost, first, last, mv, sv, sd_depot, sd_tra])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRow {
    pub route_id: String,
    pub features: [f64; N_FEATURES],
    pub route_score: f64,
    /// Natural log of the score; absent for zero scores.
    pub log_score: Option<f64>,
}

/// Min-max normalizes each feature over the corpus; constant features map to 0.
pub fn normalize_rows(raw: Vec<(String, [f64; N_FEATURES], f64)>) -> Vec<FeatureRow> {
    let mut lo = [f64::INFINITY; N_FEATURES];
    let mut hi = [f64::NEG_INFINITY; N_FEATURES];
    for (_, f, _) in &raw {
        for k in 0..N_FEATURES {
            lo[k] = lo[k].min(f[k]);
            hi[k] = hi[k].max(f[k]);
        }
    }
    raw.into_iter()
        .map(|(route_id, f, score)| {
            let mut features = [0.0; N_FEATURES];
            for k in 0..N_FEATURES {
                let span = hi[k] - lo[k];
                features[k] = if span > 0.0 { (f[k] - lo[k]) / span } else { 0.0 };
            }
            FeatureRow {
                route_id,
                features,
                route_score: score,
                log_score: (score > 0.0).then(|| score.ln()),
            }
        })
        .collect()
}

/// Features for every `(instance, score)` pair, normalized over the corpus.
pub fn extract_features(routes: &[(&RouteInstance, f64)]) -> Result<Vec<FeatureRow>> {
    let raw = routes
        .iter()
        .map(|(inst, score)| Ok((inst.id().to_string(), raw_features(inst)?, *score)))
        .collect::<Result<Vec<_>>>()?;
    Ok(normalize_rows(raw))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanDiffRow {
    pub feature: String,
    #[serde(flatten)]
    pub test: WelchResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvmReport {
    pub model: SvmModel,
    pub n_low: usize,
    pub n_high: usize,
    pub train: ClassificationReport,
    pub test: ClassificationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub n_routes: usize,
    pub zero_score_excluded: usize,
    pub regression: Option<RegressionResult>,
    pub regression_error: Option<String>,
    pub svm: Option<SvmReport>,
    pub svm_error: Option<String>,
    /// Features of high-score routes minus low-score routes.
    pub mean_difference: Vec<MeanDiffRow>,
}

/// `Some(true)` for high-score routes, `Some(false)` for low-score ones.
pub fn score_class(score: f64) -> Option<bool> {
    if score < LOW_SCORE {
        Some(false)
    } else if score > HIGH_SCORE {
        Some(true)
    } else {
        None
    }
}

pub fn svm_report(rows: &[FeatureRow], config: &SvmConfig, train_frac: f64, seed: u64) -> Result<SvmReport> {
    let mut labelled: Vec<(&FeatureRow, bool)> = rows.iter().filter_map(|r| score_class(r.route_score).map(|c| (r, c))).collect();
    let n_high = labelled.iter().filter(|(_, c)| *c).count();
    let n_low = labelled.len() - n_high;
    if n_low == 0 || n_high == 0 {
        return Err(Error::InvalidArgument(format!("need both score classes, got {n_low} low and {n_high} high")));
    }
    labelled.sort_by(|a, b| a.0.route_id.cmp(&b.0.route_id));
    labelled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((train_frac * labelled.len() as f64).round() as usize).clamp(1, labelled.len());
    let (train, test) = labelled.split_at(n_train);
    let xs = |set: &[(&FeatureRow, bool)]| set.iter().map(|(r, _)| r.features.to_vec()).collect::<Vec<_>>();
    let ys = |set: &[(&FeatureRow, bool)]| set.iter().map(|(_, c)| *c).collect::<Vec<_>>();
    let model = svm_fit(&xs(train), &ys(train), config)?;
    let eval = |set: &[(&FeatureRow, bool)]| {
        let pred: Vec<bool> = set.iter().map(|(r, _)| model.predict(&r.features)).collect();
        classification_report(&ys(set), &pred)
    };
    let (train_r, test_r) = (eval(train), eval(test));
    Ok(SvmReport {
        model,
        n_low,
        n_high,
        train: train_r,
        test: test_r,
    })
}

pub fn mean_difference(rows: &[FeatureRow]) -> Vec<MeanDiffRow> {
    let (mut low, mut high) = (Vec::new(), Vec::new());
    for r in rows {
        match score_class(r.route_score) {
            Some(true) => high.push(r),
            Some(false) => low.push(r),
            None => {}
        }
    }
    if low.is_empty() || high.is_empty() {
        return Vec::new();
    }
    (0..N_FEATURES)
        .map(|k| MeanDiffRow {
            feature: FEATURE_NAMES[k].into(),
            test: welch_t_test(
                &low.iter().map(|r| r.features[k]).collect::<Vec<_>>(),
                &high.iter().map(|r| r.features[k]).collect::<Vec<_>>(),
            ),
        })
        .collect()
}

/// Full report. Regression and classifier failures are recorded rather than
/// aborting the rest of the analysis.
pub fn analyze(rows: &[FeatureRow], svm: &SvmConfig, seed: u64) -> AnalysisReport {
    let positive: Vec<&FeatureRow> = rows.iter().filter(|r| r.log_score.is_some()).collect();
    let x: Vec<Vec<f64>> = positive.iter().map(|r| r.features.to_vec()).collect();
    let y: Vec<f64> = positive.iter().map(|r| r.log_score.expect("filtered")).collect();
    let (regression, regression_error) = match ols(&x, &y, &FEATURE_NAMES) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (svm, svm_error) = match svm_report(rows, svm, 0.8, seed) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    AnalysisReport {
        n_routes: rows.len(),
        zero_score_excluded: rows.len() - positive.len(),
        regression,
        regression_error,
        svm,
        svm_error,
        mean_difference: mean_difference(rows),
    }
}
