//! Hierarchical last-mile routing with learnable zone weights.
//!
//! A route is sequenced in two levels: zones are ordered first by a savings
//! tour over weighted zone features, then each zone is sequenced as an open
//! path between chosen entry and exit stops. Sequences are scored against a
//! benchmark by sequence deviation times normalized edit distance with real
//! penalty, and the zone weights are tuned by Bayesian optimization.

pub mod analysis;
pub mod baselines;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod learning;
pub mod model;
pub mod router;
pub mod routing;
pub mod scoring;
pub mod synth;
pub mod zones;

pub use error::{Error, Result};
