use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use hrlp::analysis::{analyze, extract_features, SvmConfig, FEATURE_NAMES};
use hrlp::baselines::{standard_tsp, stop_level_route, PreparedStops};
use hrlp::dataset::{dataset_files, ingest, write_dataset};
use hrlp::experiment::{
    evaluate, histogram, split_corpus, summarize, sweep_h, tagged_history, train_per_depot, EvalWeights, ExperimentConfig,
    Method,
};
use hrlp::learning::HistoryRow;
use hrlp::model::{Rating, RouteInstance, StopId};
use hrlp::router::route_instance;
use hrlp::scoring::{normalize_times, route_score, DEFAULT_GAP_PENALTY};
use hrlp::synth::{plant_benchmarks, synth_suite, ClusterGeometry, SynthSpec};
use hrlp::zones::{build_partition, zone_feature_rows, zone_features, ThetaVector};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::args::{
    AnalyzeArgs, EvalArgs, IngestArgs, LearnedMethod, MethodArg, RouteArgs, ScoreArgs, SweepArgs, SynthArgs, TrainArgs,
};
use crate::config;
use crate::error::{CliError, CliResult};
use crate::io::{load_corpus, read_sequences, select, stations, write_csv, write_json_pretty, write_thetas, ThetaSource};
use crate::manifest::{default_path, Manifest};

/// Options shared by every subcommand.
pub struct Globals<'a> {
    pub config: Option<&'a Path>,
    pub manifest: Option<&'a Path>,
}

impl Globals<'_> {
    fn finish(&self, manifest: &Manifest, out: &Path) -> CliResult<()> {
        let path = self.manifest.map(Path::to_path_buf).unwrap_or_else(|| default_path(out));
        manifest.write(&path)
    }
}

fn experiment_manifest<A: Serialize>(command: &str, args: &A, config: &ExperimentConfig) -> Manifest {
    Manifest::new(
        command,
        json!({ "args": args, "experiment": config }),
        json!({ "optimizer": config.bo.seed, "split": config.split_seed }),
    )
}

#[derive(Serialize)]
struct IngestSummary {
    routes_valid: usize,
    routes_rejected: usize,
    high_rated: usize,
    stations: BTreeMap<String, usize>,
    deliveries_min: usize,
    deliveries_max: usize,
    deliveries_mean: f64,
    unzoned_stops: usize,
    rejected: Vec<String>,
}

pub fn ingest_cmd(g: &Globals, a: &IngestArgs) -> CliResult<()> {
    let mut m = Manifest::new("ingest", json!({ "args": a }), json!({}));
    for f in dataset_files(&a.corpus.input) {
        m.input(&f)?;
    }
    let report = ingest(&a.corpus.input)?;
    let routes: Vec<&RouteInstance> = report
        .instances
        .iter()
        .filter(|r| a.corpus.all_ratings || r.rating() == Some(Rating::High))
        .collect();
    let mut station_counts = BTreeMap::new();
    for r in &routes {
        *station_counts.entry(r.station().to_owned()).or_default() += 1;
    }
    let sizes: Vec<usize> = routes.iter().map(|r| r.n_stops() - 1).collect();
    let summary = IngestSummary {
        routes_valid: report.instances.len(),
        routes_rejected: report.errors.len(),
        high_rated: report.instances.iter().filter(|r| r.rating() == Some(Rating::High)).count(),
        stations: station_counts,
        deliveries_min: sizes.iter().copied().min().unwrap_or(0),
        deliveries_max: sizes.iter().copied().max().unwrap_or(0),
        deliveries_mean: if sizes.is_empty() {
            0.0
        } else {
            sizes.iter().sum::<usize>() as f64 / sizes.len() as f64
        },
        unzoned_stops: routes.iter().map(|r| r.unzoned_stops().len()).sum(),
        rejected: report.errors.iter().map(|e| e.to_string()).collect(),
    };
    for e in &summary.rejected {
        log::warn!("rejected: {e}");
    }
    write_json_pretty(&a.out, &summary)?;
    m.output(&a.out);
    g.finish(&m, &a.out)?;
    if a.strict && summary.routes_rejected > 0 {
        return Err(CliError::Validation(format!("{} routes failed validation", summary.routes_rejected)));
    }
    Ok(())
}

pub fn synth_cmd(g: &Globals, a: &SynthArgs) -> CliResult<()> {
    let config = config::load(g.config, &a.overrides)?;
    if a.routes == 0 || a.zones == 0 || a.stops_min == 0 || a.stops_min > a.stops_max {
        return Err(CliError::Config("need routes, zones and 1 <= stops-min <= stops-max".into()));
    }
    let mut geometry = ClusterGeometry::default();
    if let Some(r) = a.cluster_radius {
        geometry.cluster_radius_m = r;
    }
    if let Some(n) = a.noise {
        geometry.noise_s = n;
    }
    let base = SynthSpec {
        n_zones: a.zones,
        stops_per_zone: (a.stops_min, a.stops_max),
        seed: a.synth_seed,
        geometry,
        ..Default::default()
    };
    let mut routes = synth_suite(&base, a.routes, a.stations)?;
    if let Some(text) = &a.plant_theta {
        let theta = ThetaVector::parse_inline(text)?;
        routes = plant_benchmarks(&routes, |r| {
            route_instance(r, &theta, &config.router, config.partition()).map(|o| o.sequence)
        })?;
    }
    write_dataset(&a.out, &routes)?;
    let mut m = Manifest::new(
        "synth",
        json!({ "args": a, "experiment": config }),
        json!({ "synth": a.synth_seed }),
    );
    for f in dataset_files(&a.out) {
        m.output(&f);
    }
    g.finish(&m, &a.out)
}

fn route_one(
    r: &RouteInstance,
    method: MethodArg,
    zone: &BTreeMap<String, ThetaVector>,
    stop: &BTreeMap<String, hrlp::zones::StopTheta>,
    config: &ExperimentConfig,
) -> Option<Vec<StopId>> {
    let seq = match method {
        MethodArg::Tsp => standard_tsp(r),
        MethodArg::Hrlp => {
            let theta = zone.get(r.station())?;
            route_instance(r, theta, &config.router, config.partition()).map(|o| o.sequence)
        }
        MethodArg::StopBo => {
            let theta = stop.get(r.station())?;
            stop_level_route(&PreparedStops::new(r.clone()), theta)
        }
    };
    match seq {
        Ok(s) => Some(r.sequence_ids(&s)),
        Err(e) => {
            log::warn!("route {}: {e}", r.id());
            None
        }
    }
}

#[derive(Serialize)]
struct FeatureDumpRow<'a> {
    route_id: &'a str,
    from: String,
    to: String,
    phi1: f64,
    phi2: f64,
    phi3: f64,
    phi4: f64,
    phi5: f64,
}

pub fn route_cmd(g: &Globals, a: &RouteArgs) -> CliResult<()> {
    let config = config::load(g.config, &a.overrides)?;
    let mut m = experiment_manifest("route", a, &config);
    let routes = select(load_corpus(&a.corpus, &mut m)?, a.split, &config)?;
    let names = stations(&routes);
    let need = |what: &str| CliError::Config(format!("--method {what} needs --theta"));
    let (zone, stop) = match a.method {
        MethodArg::Tsp => (BTreeMap::new(), BTreeMap::new()),
        MethodArg::Hrlp => {
            let src = ThetaSource::<5>::parse(a.theta.as_deref().ok_or_else(|| need("hrlp"))?, &mut m)?;
            (src.resolve(names.iter().copied()), BTreeMap::new())
        }
        MethodArg::StopBo => {
            let src = ThetaSource::<4>::parse(a.theta.as_deref().ok_or_else(|| need("stop-bo"))?, &mut m)?;
            (BTreeMap::new(), src.resolve(names.iter().copied()))
        }
    };
    for s in &names {
        if a.method != MethodArg::Tsp && !zone.contains_key(*s) && !stop.contains_key(*s) {
            log::warn!("no weights for station {s}; skipping its routes");
        }
    }
    let out: Vec<(String, Option<Vec<StopId>>)> = routes
        .par_iter()
        .map(|r| (r.id().to_string(), route_one(r, a.method, &zone, &stop, &config)))
        .collect();
    let sequences: BTreeMap<String, Vec<String>> = out
        .into_iter()
        .filter_map(|(id, s)| s.map(|ids| (id, ids.iter().map(|i| i.to_string()).collect())))
        .collect();
    if sequences.is_empty() {
        return Err(CliError::Validation("no route could be sequenced".into()));
    }
    write_json_pretty(&a.out, &sequences)?;
    m.output(&a.out);

    if let Some(path) = &a.dump_features {
        let mut rows = Vec::new();
        for r in &routes {
            match build_partition(r, config.partition()) {
                Ok(p) => {
                    let f = zone_features(r, &p);
                    for (from, to, v) in zone_feature_rows(&p, &f) {
                        rows.push(FeatureDumpRow {
                            route_id: r.id().as_str(),
                            from,
                            to,
                            phi1: v[0],
                            phi2: v[1],
                            phi3: v[2],
                            phi4: v[3],
                            phi5: v[4],
                        });
                    }
                }
                Err(e) => log::warn!("route {}: {e}", r.id()),
            }
        }
        write_csv(path, &rows)?;
        m.output(path);
    }
    g.finish(&m, &a.out)
}

#[derive(Serialize)]
struct ScoreRow {
    route_id: String,
    sd: f64,
    erp_n: f64,
    erp_e: usize,
    route_score: f64,
}

fn to_ids(ids: &[String]) -> CliResult<Vec<StopId>> {
    ids.iter()
        .map(|s| StopId::new(s.clone()).map_err(CliError::from))
        .collect()
}

pub fn score_cmd(g: &Globals, a: &ScoreArgs) -> CliResult<()> {
    let gap = a.gap.unwrap_or(DEFAULT_GAP_PENALTY);
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(CliError::Config(format!("gap penalty {gap} must be finite and nonnegative")));
    }
    let mut m = Manifest::new("score", json!({ "args": a, "gap_penalty": gap }), json!({}));
    let corpus = crate::args::Corpus {
        all_ratings: true,
        ..a.corpus.clone()
    };
    let routes = load_corpus(&corpus, &mut m)?;
    let by_id: HashMap<&str, &RouteInstance> = routes.iter().map(|r| (r.id().as_str(), r)).collect();
    let bench = a.benchmark.as_deref().map(|p| read_sequences(p, &mut m)).transpose()?;
    let candidates = read_sequences(&a.candidate, &mut m)?;

    let mut rows = Vec::new();
    let mut failures = 0usize;
    for (route_id, ids) in &candidates {
        let scored = (|| -> CliResult<ScoreRow> {
            let inst = by_id
                .get(route_id.as_str())
                .ok_or_else(|| CliError::Validation(format!("route {route_id} is not in the dataset")))?;
            let cand = inst.sequence_from_ids(&to_ids(ids)?)?;
            let reference = match &bench {
                Some(b) => {
                    let ids = b
                        .get(route_id)
                        .ok_or_else(|| CliError::Validation(format!("route {route_id} has no benchmark")))?;
                    inst.sequence_from_ids(&to_ids(ids)?)?
                }
                None => inst
                    .actual()
                    .cloned()
                    .ok_or_else(|| CliError::Validation(format!("route {route_id} has no recorded sequence")))?,
            };
            let s = route_score(reference.as_slice(), cand.as_slice(), &normalize_times(inst.times()), gap)?;
            Ok(ScoreRow {
                route_id: route_id.clone(),
                sd: s.sd,
                erp_n: s.erp_n,
                erp_e: s.erp_e,
                route_score: s.route_score,
            })
        })();
        match scored {
            Ok(r) => rows.push(r),
            Err(e) => {
                log::warn!("{e}");
                failures += 1;
            }
        }
    }
    write_csv(&a.out, &rows)?;
    m.output(&a.out);
    g.finish(&m, &a.out)?;
    if failures > 0 {
        return Err(CliError::Validation(format!("{failures} candidate sequences could not be scored")));
    }
    Ok(())
}

fn write_history(path: &Path, k: usize, rows: &[(String, HistoryRow)]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["station".to_owned(), "iter".to_owned()];
    header.extend((1..=k).map(|i| format!("theta{i}")));
    header.extend(["loss".to_owned(), "best_so_far".to_owned()]);
    w.write_record(&header)?;
    for (station, r) in rows {
        let mut rec = vec![station.clone(), r.iter.to_string()];
        rec.extend(r.x.iter().map(|v| v.to_string()));
        rec.extend([r.loss.to_string(), r.best_so_far.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn train_cmd(g: &Globals, a: &TrainArgs) -> CliResult<()> {
    let config = config::load(g.config, &a.overrides)?;
    let mut m = experiment_manifest("train", a, &config);
    let routes = select(load_corpus(&a.corpus, &mut m)?, a.split, &config)?;
    let method = match a.method {
        LearnedMethod::Hrlp => Method::Hrlp,
        LearnedMethod::StopBo => Method::StopBo,
    };
    let models = train_per_depot(&routes, &[method], &config)?;
    let (history, k) = match a.method {
        LearnedMethod::Hrlp => {
            if models.hrlp.is_empty() {
                return Err(CliError::Validation("no station had usable training routes".into()));
            }
            for (s, t) in &models.hrlp {
                log::info!("station {s}: best loss {} at {:?}", t.outcome.best_loss, t.theta.values());
            }
            write_thetas(&a.out, &models.hrlp_thetas())?;
            (tagged_history(&models.hrlp), 5)
        }
        LearnedMethod::StopBo => {
            write_thetas(&a.out, &models.stop_thetas())?;
            (tagged_history(&models.stop_bo), 4)
        }
    };
    m.output(&a.out);
    if let Some(path) = &a.history {
        write_history(path, k, &history)?;
        m.output(path);
    }
    g.finish(&m, &a.out)
}

#[derive(Serialize)]
struct SummaryCsvRow {
    station: String,
    method: Method,
    n_routes: usize,
    mean_score: f64,
}

#[derive(Serialize)]
struct HistogramCsvRow {
    method: Method,
    lo: f64,
    hi: f64,
    count: usize,
}

pub fn eval_cmd(g: &Globals, a: &EvalArgs) -> CliResult<()> {
    let config = config::load(g.config, &a.overrides)?;
    let mut m = experiment_manifest("eval", a, &config);
    let routes = select(load_corpus(&a.corpus, &mut m)?, a.split, &config)?;
    let names = stations(&routes);
    let zone = a.theta.as_deref().map(|t| ThetaSource::<5>::parse(t, &mut m)).transpose()?;
    let stop = a.stop_theta.as_deref().map(|t| ThetaSource::<4>::parse(t, &mut m)).transpose()?;

    let mut methods: Vec<Method> = a.methods.iter().map(|&x| x.into()).collect();
    if methods.is_empty() {
        methods.push(Method::Tsp);
        if zone.is_some() {
            methods.push(Method::Hrlp);
        }
        if stop.is_some() {
            methods.push(Method::StopBo);
        }
    }
    if methods.contains(&Method::Hrlp) && zone.is_none() {
        return Err(CliError::Config("method hrlp needs --theta".into()));
    }
    if methods.contains(&Method::StopBo) && stop.is_none() {
        return Err(CliError::Config("method stop-bo needs --stop-theta".into()));
    }
    let weights = EvalWeights {
        hrlp: zone.map(|z| z.resolve(names.iter().copied())).unwrap_or_default(),
        stop_bo: stop.map(|s| s.resolve(names.iter().copied())).unwrap_or_default(),
    };
    let rows = evaluate(&routes, &methods, &weights, &config)?;
    if rows.is_empty() {
        return Err(CliError::Validation("no route could be evaluated".into()));
    }
    write_csv(&a.out, &rows)?;
    m.output(&a.out);

    if let Some(path) = &a.summary {
        let mut out: Vec<SummaryCsvRow> = summarize(&rows, false)
            .into_iter()
            .chain(summarize(&rows, true))
            .map(|s| SummaryCsvRow {
                station: s.station.unwrap_or_else(|| "all".into()),
                method: s.method,
                n_routes: s.n_routes,
                mean_score: s.mean_score,
            })
            .collect();
        out.sort_by(|x, y| (x.station != "all", &x.station, x.method).cmp(&(y.station != "all", &y.station, y.method)));
        write_csv(path, &out)?;
        m.output(path);
    }
    if let Some(path) = &a.histogram {
        let mut by_method: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
        for r in &rows {
            by_method.entry(r.method).or_default().push(r.route_score);
        }
        let out: Vec<HistogramCsvRow> = by_method
            .into_iter()
            .flat_map(|(method, v)| {
                histogram(&v, a.bins, 0.0, a.hist_max)
                    .into_iter()
                    .map(move |b| HistogramCsvRow { method, lo: b.lo, hi: b.hi, count: b.count })
            })
            .collect();
        write_csv(path, &out)?;
        m.output(path);
    }
    for s in summarize(&rows, false) {
        log::info!("{}: mean score {} over {} routes", s.method, s.mean_score, s.n_routes);
    }
    g.finish(&m, &a.out)
}

fn read_scores(path: &Path, method: &str, m: &mut Manifest) -> CliResult<Vec<(String, f64)>> {
    if !path.is_file() {
        return Err(CliError::Validation(format!("missing input file {}", path.display())));
    }
    m.input(path)?;
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(id_col), Some(score_col)) = (col("route_id"), col("route_score")) else {
        return Err(CliError::Validation(format!("{} needs route_id and route_score columns", path.display())));
    };
    let method_col = col("method");
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if let Some(c) = method_col {
            if rec.get(c) != Some(method) {
                continue;
            }
        }
        let id = rec.get(id_col).unwrap_or_default().to_owned();
        let score: f64 = rec
            .get(score_col)
            .unwrap_or_default()
            .parse()
            .map_err(|e| CliError::Validation(format!("route {id}: bad route_score ({e})")))?;
        if seen.insert(id.clone(), ()).is_some() {
            log::warn!("route {id} appears more than once; keeping the first row");
            continue;
        }
        out.push((id, score));
    }
    Ok(out)
}

#[derive(Serialize)]
struct CoefficientCsvRow<'a> {
    name: &'a str,
    estimate: f64,
    std_error: f64,
    t: f64,
    p: f64,
}

#[derive(Serialize)]
struct MeanDiffCsvRow<'a> {
    feature: &'a str,
    mean_low: f64,
    mean_high: f64,
    diff: f64,
    t: f64,
    dof: f64,
    p: f64,
}

#[derive(Serialize)]
struct SvmCsvRow {
    split: &'static str,
    class: &'static str,
    precision: f64,
    recall: f64,
    f1: f64,
    support: usize,
    accuracy: f64,
}

pub fn analyze_cmd(g: &Globals, a: &AnalyzeArgs) -> CliResult<()> {
    let svm = SvmConfig { c: a.svm_c, epochs: a.svm_epochs };
    if !(svm.c > 0.0) || svm.epochs == 0 {
        return Err(CliError::Config("SVM needs C > 0 and at least one epoch".into()));
    }
    let mut m = Manifest::new("analyze", json!({ "args": a }), json!({ "analysis": a.analysis_seed }));
    let scores = read_scores(&a.scores, &a.method, &mut m)?;
    let routes = load_corpus(&crate::args::Corpus { all_ratings: true, ..a.corpus.clone() }, &mut m)?;
    let by_id: HashMap<&str, &RouteInstance> = routes.iter().map(|r| (r.id().as_str(), r)).collect();
    let mut pairs = Vec::new();
    for (id, score) in &scores {
        match by_id.get(id.as_str()) {
            Some(r) => pairs.push((*r, *score)),
            None => log::warn!("route {id} is not in the dataset; skipped"),
        }
    }
    if pairs.is_empty() {
        return Err(CliError::Validation("no scored route matches the dataset".into()));
    }
    let rows = extract_features(&pairs)?;
    let report = analyze(&rows, &svm, a.analysis_seed);
    write_json_pretty(&a.out, &report)?;
    m.output(&a.out);

    if let Some(dir) = &a.tables {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Validation(format!("{}: {e}", dir.display())))?;
        let mut features = csv::Writer::from_path(dir.join("features.csv"))?;
        let mut header = vec!["route_id"];
        header.extend(FEATURE_NAMES);
        header.push("route_score");
        features.write_record(&header)?;
        for r in &rows {
            let mut rec = vec![r.route_id.clone()];
            rec.extend(r.features.iter().map(|v| v.to_string()));
            rec.push(r.route_score.to_string());
            features.write_record(&rec)?;
        }
        features.flush().map_err(|e| CliError::Validation(e.to_string()))?;
        m.output(&dir.join("features.csv"));

        if let Some(reg) = &report.regression {
            let out: Vec<CoefficientCsvRow> = reg
                .coefficients
                .iter()
                .map(|c| CoefficientCsvRow { name: &c.name, estimate: c.estimate, std_error: c.std_error, t: c.t, p: c.p })
                .collect();
            write_csv(&dir.join("regression.csv"), &out)?;
            m.output(&dir.join("regression.csv"));
        }
        if let Some(s) = &report.svm {
            let mut out = Vec::new();
            for (split, rep) in [("train", &s.train), ("test", &s.test)] {
                for (class, c) in [("high", &rep.positive), ("low", &rep.negative)] {
                    out.push(SvmCsvRow {
                        split,
                        class,
                        precision: c.precision,
                        recall: c.recall,
                        f1: c.f1,
                        support: c.support,
                        accuracy: rep.accuracy,
                    });
                }
            }
            write_csv(&dir.join("svm.csv"), &out)?;
            m.output(&dir.join("svm.csv"));
        }
        let out: Vec<MeanDiffCsvRow> = report
            .mean_difference
            .iter()
            .map(|d| MeanDiffCsvRow {
                feature: &d.feature,
                mean_low: d.test.mean_a,
                mean_high: d.test.mean_b,
                diff: d.test.diff,
                t: d.test.t,
                dof: d.test.dof,
                p: d.test.p,
            })
            .collect();
        write_csv(&dir.join("mean_difference.csv"), &out)?;
        m.output(&dir.join("mean_difference.csv"));
    }
    if let Some(e) = &report.regression_error {
        log::warn!("regression skipped: {e}");
    }
    if let Some(e) = &report.svm_error {
        log::warn!("classifier skipped: {e}");
    }
    g.finish(&m, &a.out)
}

pub fn sweep_cmd(g: &Globals, a: &SweepArgs) -> CliResult<()> {
    let config = config::load(g.config, &a.overrides)?;
    if a.hs.is_empty() || a.hs.contains(&0) {
        return Err(CliError::Config("--hs needs positive budgets".into()));
    }
    let mut m = experiment_manifest("sweep-h", a, &config);
    let routes = load_corpus(&a.corpus, &mut m)?;
    let (train, test) = split_corpus(routes, &config)?;
    let rows = sweep_h(&train, &test, &a.hs, &config)?;
    write_csv(&a.out, &rows)?;
    m.output(&a.out);
    g.finish(&m, &a.out)
}

