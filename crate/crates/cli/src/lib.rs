//! Command-line harness for the hrlp router: dataset ingestion, synthetic
//! suites, routing, scoring, weight tuning, evaluation, difficulty analysis
//! and the candidate-budget sweep.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;

pub use args::Cli;
pub use error::{CliError, CliResult};

use args::Command;
use commands::Globals;

pub fn run(cli: &Cli) -> CliResult<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    }
    let g = Globals {
        config: cli.config.as_deref(),
        manifest: cli.manifest.as_deref(),
    };
    match &cli.command {
        Command::Ingest(a) => commands::ingest_cmd(&g, a),
        Command::Synth(a) => commands::synth_cmd(&g, a),
        Command::Route(a) => commands::route_cmd(&g, a),
        Command::Score(a) => commands::score_cmd(&g, a),
        Command::Train(a) => commands::train_cmd(&g, a),
        Command::Eval(a) => commands::eval_cmd(&g, a),
        Command::Analyze(a) => commands::analyze_cmd(&g, a),
        Command::SweepH(a) => commands::sweep_cmd(&g, a),
    }
}
