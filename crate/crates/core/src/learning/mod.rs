//! Weight tuning for the hierarchical router.

pub mod acquisition;
pub mod bo;
pub mod design;
pub mod gp;

pub use acquisition::expected_improvement;
pub use bo::{optimize, BoConfig, BoOutcome, HistoryRow};
pub use gp::{Gp, GpHyper};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::router::{route_prepared, PreparedRoute, RouterConfig};
use crate::scoring::route_score;
use crate::zones::{ThetaVector, N_ZONE_FEATURES};

/// Applies `f` to every item, in parallel when the feature is enabled. The
/// output order always matches the input order.
pub(crate) fn map_items<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Mean of the per-route losses that succeed; failing routes are skipped
/// with a warning. Fails when every route fails.
pub(crate) fn mean_over_routes<T: Sync>(
    items: &[T],
    name: impl Fn(&T) -> String + Sync + Send,
    score: impl Fn(&T) -> Result<f64> + Sync + Send,
) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::Empty("no routes to evaluate"));
    }
    let scores = map_items(items, |r| score(r).map_err(|e| (name(r), e)));
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut last_err = None;
    for s in scores {
        match s {
            Ok(v) => {
                sum += v;
                count += 1;
            }
            Err((route, e)) => {
                log::warn!("skipping route {route}: {e}");
                last_err = Some(e);
            }
        }
    }
    match (count, last_err) {
        (0, Some(e)) => Err(e),
        _ => Ok(sum / count as f64),
    }
}

pub fn route_loss(route: &PreparedRoute, theta: &ThetaVector, config: &RouterConfig, gap: f64) -> Result<f64> {
    let bench = route
        .instance
        .actual()
        .ok_or_else(|| Error::validation(route.instance.id().as_str(), "no benchmark sequence"))?;
    let out = route_prepared(route, theta, config)?;
    Ok(route_score(bench.as_slice(), out.sequence.as_slice(), &route.ntimes, gap)?.route_score)
}

/// Mean route score of the router's output under `theta`.
pub fn hrlp_loss(routes: &[PreparedRoute], theta: &ThetaVector, config: &RouterConfig, gap: f64) -> Result<f64> {
    mean_over_routes(
        routes,
        |r| r.instance.id().to_string(),
        |r| route_loss(r, theta, config, gap),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained<T> {
    pub theta: T,
    pub outcome: BoOutcome,
}

/// Tunes the zone weights on `routes`.
pub fn train_hrlp(
    routes: &[PreparedRoute],
    router: &RouterConfig,
    bo: &BoConfig,
    gap: f64,
) -> Result<Trained<ThetaVector>> {
    let outcome = optimize(N_ZONE_FEATURES, bo, |x| {
        let theta = ThetaVector::from_slice(x)?;
        hrlp_loss(routes, &theta, router, gap)
    })?;
    Ok(Trained {
        theta: ThetaVector::from_slice(&outcome.best_x)?,
        outcome,
    })
}
