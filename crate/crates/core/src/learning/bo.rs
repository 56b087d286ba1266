//! Bayesian optimization over a box, minimizing a black-box loss.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::acquisition::expected_improvement;
use super::design::shifted_halton;
use super::gp::{fit_lengthscales, Gp, GpHyper, LengthscaleBounds};
use crate::error::{Error, Result};
use crate::zones::{THETA_MAX, THETA_MIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoConfig {
    /// Initial design size.
    pub n_init: usize,
    /// Total loss evaluations, initial design included.
    pub n_total: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
    pub ei_starts: usize,
    /// Lengthscales are re-estimated every this many iterations (0 disables).
    pub refit_every: usize,
    pub initial_lengthscale: f64,
    pub noise_var: f64,
}

impl Default for BoConfig {
    fn default() -> Self {
        Self {
            n_init: 20,
            n_total: 100,
            lo: THETA_MIN,
            hi: THETA_MAX,
            seed: 0,
            ei_starts: 64,
            refit_every: 10,
            initial_lengthscale: 2.0,
            noise_var: 1e-6,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 || self.n_init > self.n_total {
            return Err(Error::InvalidArgument(format!(
                "need 0 < n_init <= n_total, got {} and {}",
                self.n_init, self.n_total
            )));
        }
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::InvalidArgument("bounds must satisfy lo < hi".into()));
        }
        if self.ei_starts == 0 || !(self.initial_lengthscale > 0.0) || !(self.noise_var > 0.0) {
            return Err(Error::InvalidArgument("ei_starts, lengthscale and noise must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    /// 1-based evaluation index.
    pub iter: usize,
    pub x: Vec<f64>,
    pub loss: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoOutcome {
    pub best_x: Vec<f64>,
    pub best_loss: f64,
    pub history: Vec<HistoryRow>,
    pub lengthscales: Vec<f64>,
}

fn coordinate_ascent(f: &impl Fn(&[f64]) -> f64, start: Vec<f64>, lo: f64, hi: f64) -> (Vec<f64>, f64) {
    let width = hi - lo;
    let mut cur = start;
    let mut val = f(&cur);
    let mut step = 0.25 * width;
    while step > 1e-3 * width {
        let mut moved = false;
        for d in 0..cur.len() {
            for dir in [1.0, -1.0] {
                let mut cand = cur.clone();
                cand[d] = (cand[d] + dir * step).clamp(lo, hi);
                if cand[d] == cur[d] {
                    continue;
                }
                let v = f(&cand);
                if v > val {
                    cur = cand;
                    val = v;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (cur, val)
}

/// Maximizes `acq` over `[lo, hi]^dim` from `starts` uniform points, each
/// refined by coordinate ascent with bound clamping.
pub fn maximize_acquisition<R: Rng>(
    acq: impl Fn(&[f64]) -> f64,
    dim: usize,
    lo: f64,
    hi: f64,
    starts: usize,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..starts {
        let x0: Vec<f64> = (0..dim).map(|_| rng.gen_range(lo..=hi)).collect();
        let (x, v) = coordinate_ascent(&acq, x0, lo, hi);
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((x, v));
        }
    }
    best.expect("at least one start")
}

/// Minimizes `objective` over `[lo, hi]^dim`.
pub fn optimize<F>(dim: usize, config: &BoConfig, mut objective: F) -> Result<BoOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    config.validate()?;
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let (lo, hi) = (config.lo, config.hi);
    let width = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(config.n_total);
    let mut ys: Vec<f64> = Vec::with_capacity(config.n_total);
    let mut history = Vec::with_capacity(config.n_total);
    let mut best = f64::INFINITY;
    let mut best_x = Vec::new();

    let mut record = |x: Vec<f64>, xs: &mut Vec<Vec<f64>>, ys: &mut Vec<f64>| -> Result<()> {
        let loss = objective(&x)?;
        if !loss.is_finite() {
            return Err(Error::InvalidArgument(format!("objective returned {loss}")));
        }
        if loss < best {
            best = loss;
            best_x.clone_from(&x);
        }
        history.push(HistoryRow {
            iter: history.len() + 1,
            x: x.clone(),
            loss,
            best_so_far: best,
        });
        xs.push(x);
        ys.push(loss);
        Ok(())
    };

    for u in shifted_halton(config.n_init, dim, &mut rng) {
        let x = u.iter().map(|v| lo + v * width).collect();
        record(x, &mut xs, &mut ys)?;
    }

    let bounds = LengthscaleBounds {
        lo: 0.02 * width,
        hi: 5.0 * width,
    };
    let mut lengthscales = vec![config.initial_lengthscale; dim];
    for step in 0..config.n_total - config.n_init {
        let mut hyper = GpHyper {
            lengthscales: lengthscales.clone(),
            ..GpHyper::initial(dim, config.initial_lengthscale, config.noise_var, &ys)
        };
        if config.refit_every > 0 && step % config.refit_every == 0 {
            hyper = fit_lengthscales(&xs, &ys, &hyper, bounds, config.initial_lengthscale, 4, &mut rng)?;
            lengthscales.clone_from(&hyper.lengthscales);
        }
        let gp = Gp::fit(&xs, &ys, hyper)?;
        let incumbent = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let acq = |x: &[f64]| {
            let (mu, sd) = gp.predict(x);
            expected_improvement(mu, sd, incumbent)
        };
        let (x, _) = maximize_acquisition(acq, dim, lo, hi, config.ei_starts, &mut rng);
        log::debug!("bo step {}: proposing {:?}", step + 1, x);
        record(x, &mut xs, &mut ys)?;
    }

    Ok(BoOutcome {
        best_x,
        best_loss: best,
        history,
        lengthscales,
    })
}
