use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use hrlp::dataset::{dataset_files, filter_high_quality, ingest};
use hrlp::experiment::{split_corpus, ExperimentConfig};
use hrlp::model::RouteInstance;
use hrlp::zones::Theta;
use serde::{Deserialize, Serialize};

use crate::args::{Corpus, Split};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;

/// Ingests a dataset, logging rejected routes, and keeps high-rated routes
/// unless every rating was requested.
pub fn load_corpus(corpus: &Corpus, manifest: &mut Manifest) -> CliResult<Vec<RouteInstance>> {
    for f in dataset_files(&corpus.input) {
        manifest.input(&f)?;
    }
    let report = ingest(&corpus.input)?;
    for e in &report.errors {
        log::warn!("rejected: {e}");
    }
    let mut routes = report.instances;
    if !corpus.all_ratings {
        routes = filter_high_quality(routes);
    }
    if routes.is_empty() {
        return Err(CliError::Validation(format!("no usable routes in {}", corpus.input.display())));
    }
    routes.sort_by(|a, b| a.id().cmp(b.id()));
    Ok(routes)
}

pub fn select(routes: Vec<RouteInstance>, split: Split, config: &ExperimentConfig) -> CliResult<Vec<RouteInstance>> {
    let chosen = match split {
        Split::All => routes,
        Split::Train => split_corpus(routes, config)?.0,
        Split::Test => split_corpus(routes, config)?.1,
    };
    if chosen.is_empty() {
        return Err(CliError::Validation(format!("the {split:?} split is empty").to_lowercase()));
    }
    Ok(chosen)
}

/// Weights given either inline (shared by every station) or as a file
/// mapping station codes to weights.
#[derive(Debug, Clone)]
pub enum ThetaSource<const K: usize> {
    Shared(Theta<K>),
    PerStation(BTreeMap<String, Theta<K>>),
}

impl<const K: usize> ThetaSource<K> {
    pub fn parse(arg: &str, manifest: &mut Manifest) -> CliResult<Self> {
        let path = Path::new(arg);
        if path.is_file() {
            manifest.input(path)?;
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{arg}: {e}")))?;
            let map: BTreeMap<String, Theta<K>> =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{arg}: {e}")))?;
            return Ok(Self::PerStation(map));
        }
        Theta::<K>::parse_inline(arg)
            .map(Self::Shared)
            .map_err(|e| CliError::Config(format!("--theta {arg:?} is neither a file nor a weight list ({e})")))
    }

    /// Weights for each of `stations` that has them.
    pub fn resolve<'a>(&self, stations: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, Theta<K>> {
        stations
            .into_iter()
            .filter_map(|s| {
                let t = match self {
                    Self::Shared(t) => Some(*t),
                    Self::PerStation(m) => m.get(s).copied(),
                };
                t.map(|t| (s.to_owned(), t))
            })
            .collect()
    }
}

pub fn stations(routes: &[RouteInstance]) -> BTreeSet<&str> {
    routes.iter().map(|r| r.station()).collect()
}

pub fn write_thetas<const K: usize>(path: &Path, thetas: &BTreeMap<String, Theta<K>>) -> CliResult<()> {
    write_json_pretty(path, thetas)
}

pub fn write_json_pretty<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

/// One route's sequence, either as an ordered stop list or in the
/// `{"actual": {stop: position}}` layout.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SequenceEntry {
    List(Vec<String>),
    Positions { actual: BTreeMap<String, i64> },
}

pub type Sequences = BTreeMap<String, Vec<String>>;

pub fn read_sequences(path: &Path, manifest: &mut Manifest) -> CliResult<Sequences> {
    if !path.is_file() {
        return Err(CliError::Validation(format!("missing input file {}", path.display())));
    }
    manifest.input(path)?;
    let raw: BTreeMap<String, SequenceEntry> = hrlp::dataset::read_json(path)?;
    Ok(raw
        .into_iter()
        .map(|(route, entry)| {
            let ids = match entry {
                SequenceEntry::List(ids) => ids,
                SequenceEntry::Positions { actual } => {
                    let mut pairs: Vec<(i64, String)> = actual.into_iter().map(|(k, v)| (v, k)).collect();
                    pairs.sort();
                    pairs.into_iter().map(|(_, k)| k).collect()
                }
            };
            (route, ids)
        })
        .collect())
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
