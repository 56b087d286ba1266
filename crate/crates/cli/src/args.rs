use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hrlp", version, about = "Zone-aware last-mile route sequencing experiments")]
pub struct Cli {
    /// JSON experiment configuration. Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for route-level parallelism (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Manifest path (defaults to `<out>.manifest.json`).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a dataset directory and summarize it.
    Ingest(IngestArgs),
    /// Write a synthetic dataset directory.
    Synth(SynthArgs),
    /// Sequence every route with one method.
    Route(RouteArgs),
    /// Score candidate sequences against benchmarks.
    Score(ScoreArgs),
    /// Tune per-station weights on the training split.
    Train(TrainArgs),
    /// Route and score the held-out split with several methods.
    Eval(EvalArgs),
    /// Route difficulty analysis of a score table.
    Analyze(AnalyzeArgs),
    /// Train and evaluate once per candidate budget.
    SweepH(SweepArgs),
}

/// Flags that override the configuration file.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Overrides {
    /// Entry/exit candidates per zone.
    #[arg(long)]
    pub h: Option<usize>,
    /// Count the connecting leg when choosing a zone path.
    #[arg(long)]
    pub link_aware: bool,
    /// Polish tours and paths with 2-opt.
    #[arg(long)]
    pub two_opt: bool,
    /// ERP gap penalty.
    #[arg(long)]
    pub gap: Option<f64>,
    /// Initial design size.
    #[arg(long)]
    pub n0: Option<usize>,
    /// Total loss evaluations, initial design included.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Optimizer seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub split_seed: Option<u64>,
    /// Put every stop of an unlabelled route into one zone.
    #[arg(long)]
    pub single_zone_fallback: bool,
}

/// Which routes of a dataset a command works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    All,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Corpus {
    /// Dataset directory in the four-file challenge layout.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Keep routes of every rating instead of only high-rated ones.
    #[arg(long)]
    pub all_ratings: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: Corpus,
    /// Summary JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Fail when any route is rejected.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub routes: usize,
    #[arg(long, default_value_t = 4)]
    pub zones: usize,
    #[arg(long, default_value_t = 3)]
    pub stops_min: usize,
    #[arg(long, default_value_t = 5)]
    pub stops_max: usize,
    #[arg(long, default_value_t = 1)]
    pub stations: usize,
    #[arg(long = "synth-seed", default_value_t = 0)]
    pub synth_seed: u64,
    /// Radius of each zone's stop disc, metres.
    #[arg(long)]
    pub cluster_radius: Option<f64>,
    /// Upper bound of uniform travel-time noise, seconds.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Replace benchmarks with the router's output at these weights.
    #[arg(long)]
    pub plant_theta: Option<String>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Tsp,
    Hrlp,
    StopBo,
}

impl From<MethodArg> for hrlp::experiment::Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Tsp => Self::Tsp,
            MethodArg::Hrlp => Self::Hrlp,
            MethodArg::StopBo => Self::StopBo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnedMethod {
    Hrlp,
    StopBo,
}

#[derive(Debug, Args, Serialize)]
pub struct RouteArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Weights file (station -> weights) or inline list such as `5,2,1,1,1`.
    #[arg(long)]
    pub theta: Option<String>,
    #[command(flatten)]
    pub corpus: Corpus,
    #[arg(long, value_enum, default_value_t = Split::All)]
    pub split: Split,
    /// Sequences JSON (route id -> stop ids).
    #[arg(long)]
    pub out: PathBuf,
    /// Per-route zone-pair feature table.
    #[arg(long)]
    pub dump_features: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    /// Benchmark sequences; defaults to the dataset's recorded sequences.
    #[arg(long)]
    pub benchmark: Option<PathBuf>,
    #[arg(long)]
    pub candidate: PathBuf,
    /// Dataset supplying the travel times.
    #[command(flatten)]
    pub corpus: Corpus,
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value_t = LearnedMethod::Hrlp)]
    pub method: LearnedMethod,
    #[command(flatten)]
    pub corpus: Corpus,
    #[arg(long, value_enum, default_value_t = Split::Train)]
    pub split: Split,
    /// Weights JSON (station -> weights).
    #[arg(long)]
    pub out: PathBuf,
    /// Per-evaluation optimizer trace.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub corpus: Corpus,
    #[arg(long, value_enum, default_value_t = Split::Test)]
    pub split: Split,
    /// Zone weights for `hrlp`.
    #[arg(long)]
    pub theta: Option<String>,
    /// Stop weights for `stop-bo`.
    #[arg(long)]
    pub stop_theta: Option<String>,
    /// Methods to run; defaults to tsp plus every method with weights.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Vec<MethodArg>,
    /// Per-route scores CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Mean score per method, overall and per station.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Score histogram per method.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.5)]
    pub hist_max: f64,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Score CSV with `route_id` and `route_score` columns.
    #[arg(long)]
    pub scores: PathBuf,
    /// Keep only rows of this method when the table has a `method` column.
    #[arg(long, default_value = "hrlp")]
    pub method: String,
    #[command(flatten)]
    pub corpus: Corpus,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for the regression, classifier and mean-difference tables.
    #[arg(long)]
    pub tables: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    #[arg(long, default_value_t = 10_000)]
    pub svm_epochs: usize,
    #[arg(long = "analysis-seed", default_value_t = 0)]
    pub analysis_seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub corpus: Corpus,
    /// Budgets to try.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5])]
    pub hs: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}
