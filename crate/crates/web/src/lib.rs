//! WebAssembly bindings behind the single-page demo in `www/`.
//!
//! [`Scenario`] holds the plain-Rust logic so it can be tested natively;
//! [`Demo`] wraps it for JavaScript and passes results as JSON strings.

use hrlp::baselines::standard_tsp;
use hrlp::model::StopKind;
use hrlp::router::{route_prepared, PreparedRoute, RouterConfig};
use hrlp::scoring::{route_score, DEFAULT_GAP_PENALTY};
use hrlp::synth::{synth_instance, SynthSpec};
use hrlp::zones::{PartitionOptions, ThetaVector};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Serialize)]
pub struct StopView {
    pub id: String,
    pub lat: f64,
    pub lng: f64,
    pub zone: Option<String>,
    pub depot: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteView {
    /// Stop indices, depot first.
    pub order: Vec<usize>,
    /// Zone labels in visiting order, one per block.
    pub zone_blocks: Vec<String>,
    pub contiguous: bool,
    /// Seconds, including the return leg.
    pub travel_time: f64,
    pub sd: f64,
    pub erp_n: f64,
    pub erp_e: usize,
    pub route_score: f64,
}

pub struct Scenario {
    route: PreparedRoute,
}

impl Scenario {
    pub fn generate(seed: u64, zones: usize, max_stops: usize) -> Result<Self, String> {
        let inst = synth_instance(&SynthSpec {
            seed,
            n_zones: zones.max(1),
            stops_per_zone: (1.max(max_stops / 2), max_stops.max(1)),
            ..Default::default()
        })
        .map_err(|e| e.to_string())?;
        let route = PreparedRoute::new(inst, PartitionOptions::default()).map_err(|e| e.to_string())?;
        Ok(Self { route })
    }

    pub fn stops(&self) -> Vec<StopView> {
        self.route
            .instance
            .stops()
            .iter()
            .map(|s| StopView {
                id: s.id.to_string(),
                lat: s.lat,
                lng: s.lng,
                zone: s.zone.as_ref().map(|z| z.to_string()),
                depot: s.kind == StopKind::Depot,
            })
            .collect()
    }

    fn view(&self, order: Vec<usize>) -> Result<RouteView, String> {
        let inst = &self.route.instance;
        let bench = inst.actual().ok_or("scenario has no benchmark")?;
        let s = route_score(bench.as_slice(), &order, &self.route.ntimes, DEFAULT_GAP_PENALTY).map_err(|e| e.to_string())?;
        let mut zone_blocks: Vec<String> = Vec::new();
        for &i in &order {
            if let Some(z) = &inst.stops()[i].zone {
                if zone_blocks.last().map(String::as_str) != Some(z.as_str()) {
                    zone_blocks.push(z.to_string());
                }
            }
        }
        let times = inst.times();
        let travel_time = times.path_time(&order) + order.last().map_or(0.0, |&l| times.get(l, inst.depot()));
        Ok(RouteView {
            contiguous: self.route.partition.is_contiguous(&order),
            order,
            zone_blocks,
            travel_time,
            sd: s.sd,
            erp_n: s.erp_n,
            erp_e: s.erp_e,
            route_score: s.route_score,
        })
    }

    pub fn benchmark(&self) -> Result<RouteView, String> {
        let bench = self.route.instance.actual().ok_or("scenario has no benchmark")?;
        self.view(bench.as_slice().to_vec())
    }

    pub fn tsp(&self) -> Result<RouteView, String> {
        let seq = standard_tsp(&self.route.instance).map_err(|e| e.to_string())?;
        self.view(seq.into_inner())
    }

    pub fn hrlp(&self, theta: &[f64], h: usize) -> Result<RouteView, String> {
        let theta = ThetaVector::from_slice(theta).map_err(|e| e.to_string())?;
        let config = RouterConfig { h: h.max(1), ..Default::default() };
        let out = route_prepared(&self.route, &theta, &config).map_err(|e| e.to_string())?;
        self.view(out.sequence.into_inner())
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("views serialize")
}

#[wasm_bindgen]
pub struct Demo(Scenario);

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, zones: u32, max_stops: u32) -> Result<Demo, JsError> {
        Scenario::generate(seed.into(), zones as usize, max_stops as usize)
            .map(Demo)
            .map_err(|e| JsError::new(&e))
    }

    pub fn stops(&self) -> String {
        json(&self.0.stops())
    }

    pub fn benchmark(&self) -> Result<String, JsError> {
        self.0.benchmark().map(|v| json(&v)).map_err(|e| JsError::new(&e))
    }

    pub fn tsp(&self) -> Result<String, JsError> {
        self.0.tsp().map(|v| json(&v)).map_err(|e| JsError::new(&e))
    }

    pub fn hrlp(&self, theta: &[f64], h: u32) -> Result<String, JsError> {
        self.0.hrlp(theta, h as usize).map(|v| json(&v)).map_err(|e| JsError::new(&e))
    }
}
