//! Flat stop-level comparison methods.

use crate::error::{Error, Result};
use crate::learning::{mean_over_routes, optimize, BoConfig, Trained};
use crate::model::{RouteInstance, StopSequence};
use crate::routing::{savings_tour, CostMatrix};
use crate::scoring::{normalize_times, route_score, NormalizedTimeMatrix};
use crate::zones::{stop_cost_matrix, stop_features, StopFeatureTensor, StopTheta, N_STOP_FEATURES};

/// Savings tour over raw travel times from the depot.
pub fn standard_tsp(instance: &RouteInstance) -> Result<StopSequence> {
    if instance.n_stops() == 1 {
        return Ok(StopSequence::new(vec![instance.depot()]));
    }
    let tour = savings_tour(&CostMatrix::from_times(instance.times()), instance.depot())?;
    Ok(StopSequence::new(tour.order))
}

/// Weight-independent data of a route for the stop-level learner.
#[derive(Debug, Clone)]
pub struct PreparedStops {
    pub instance: RouteInstance,
    pub features: StopFeatureTensor,
    pub ntimes: NormalizedTimeMatrix,
}

impl PreparedStops {
    pub fn new(instance: RouteInstance) -> Self {
        let features = stop_features(&instance);
        let ntimes = normalize_times(instance.times());
        Self {
            instance,
            features,
            ntimes,
        }
    }
}

/// Savings tour over the weighted stop feature costs.
pub fn stop_level_route(route: &PreparedStops, theta: &StopTheta) -> Result<StopSequence> {
    if route.instance.n_stops() == 1 {
        return Ok(StopSequence::new(vec![route.instance.depot()]));
    }
    let costs = stop_cost_matrix(&route.features, theta);
    Ok(StopSequence::new(savings_tour(&costs, route.instance.depot())?.order))
}

pub fn stop_level_loss(routes: &[PreparedStops], theta: &StopTheta, gap: f64) -> Result<f64> {
    mean_over_routes(
        routes,
        |r| r.instance.id().to_string(),
        |r| {
            let bench = r
                .instance
                .actual()
                .ok_or_else(|| Error::validation(r.instance.id().as_str(), "no benchmark sequence"))?;
            let seq = stop_level_route(r, theta)?;
            Ok(route_score(bench.as_slice(), seq.as_slice(), &r.ntimes, gap)?.route_score)
        },
    )
}

/// Tunes the four stop feature weights with the same optimizer as the
/// hierarchical router.
pub fn stop_level_bo(routes: &[PreparedStops], bo: &BoConfig, gap: f64) -> Result<Trained<StopTheta>> {
    let outcome = optimize(N_STOP_FEATURES, bo, |x| stop_level_loss(routes, &StopTheta::from_slice(x)?, gap))?;
    Ok(Trained {
        theta: StopTheta::from_slice(&outcome.best_x)?,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_instance, SynthSpec};

    #[test]
    fn tsp_single_stop() {
        let inst = synth_instance(&SynthSpec {
            n_zones: 1,
            stops_per_zone: (1, 1),
            ..Default::default()
        })
        .unwrap();
        let seq = standard_tsp(&inst).unwrap();
        assert_eq!(seq.len(), 2);
        assert_eq!(seq.as_slice()[0], inst.depot());
    }

    #[test]
    fn baselines_emit_complete_sequences() {
        let inst = synth_instance(&SynthSpec { seed: 11, ..Default::default() }).unwrap();
        let n = inst.n_stops();
        let d = inst.depot();
        standard_tsp(&inst).unwrap().validate_complete(n, d).unwrap();
        let prep = PreparedStops::new(inst);
        stop_level_route(&prep, &StopTheta::new([1.0, 2.0, 3.0, 4.0]).unwrap())
            .unwrap()
            .validate_complete(n, d)
            .unwrap();
    }
}
