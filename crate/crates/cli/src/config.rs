use std::path::Path;

use hrlp::experiment::ExperimentConfig;

use crate::args::Overrides;
use crate::error::{CliError, CliResult};

/// Reads the configuration file (if any) and applies flag overrides.
pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<ExperimentConfig> {
    let mut config = match path {
        None => ExperimentConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    apply(&mut config, overrides);
    validate(&config)?;
    Ok(config)
}

pub fn apply(config: &mut ExperimentConfig, o: &Overrides) {
    if let Some(h) = o.h {
        config.router.h = h;
    }
    config.router.link_aware |= o.link_aware;
    config.router.two_opt |= o.two_opt;
    if let Some(g) = o.gap {
        config.gap_penalty = g;
    }
    if let Some(n) = o.n0 {
        config.bo.n_init = n;
    }
    if let Some(n) = o.iters {
        config.bo.n_total = n;
    }
    if let Some(s) = o.seed {
        config.bo.seed = s;
    }
    if let Some(f) = o.train_fraction {
        config.train_fraction = f;
    }
    if let Some(s) = o.split_seed {
        config.split_seed = s;
    }
    config.single_zone_fallback |= o.single_zone_fallback;
}

pub fn validate(config: &ExperimentConfig) -> CliResult<()> {
    if config.router.h == 0 {
        return Err(CliError::Config("h must be at least 1".into()));
    }
    if !(config.gap_penalty >= 0.0 && config.gap_penalty.is_finite()) {
        return Err(CliError::Config(format!("gap penalty {} must be finite and nonnegative", config.gap_penalty)));
    }
    if !(config.train_fraction > 0.0 && config.train_fraction < 1.0) {
        return Err(CliError::Config(format!("train fraction {} must lie in (0, 1)", config.train_fraction)));
    }
    config.bo.validate().map_err(|e| CliError::Config(e.to_string()))
}
