//! Gaussian-process regression with a squared-exponential ARD kernel.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

const JITTER_STEPS: [f64; 6] = [0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2];
const SIGNAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GpHyper {
    pub lengthscales: Vec<f64>,
    pub signal_var: f64,
    pub noise_var: f64,
}

impl GpHyper {
    /// Equal lengthscales, signal variance from the targets.
    pub fn initial(dim: usize, lengthscale: f64, noise_var: f64, y: &[f64]) -> Self {
        Self {
            lengthscales: vec![lengthscale; dim],
            signal_var: target_variance(y),
            noise_var,
        }
    }
}

/// Population variance with a small floor so the kernel never vanishes.
pub fn target_variance(y: &[f64]) -> f64 {
    if y.is_empty() {
        return 1.0;
    }
    let m = y.iter().sum::<f64>() / y.len() as f64;
    let v = y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / y.len() as f64;
    v.max(SIGNAL_FLOOR)
}

pub fn kernel(a: &[f64], b: &[f64], hyper: &GpHyper) -> f64 {
    let r2: f64 = a
        .iter()
        .zip(b)
        .zip(&hyper.lengthscales)
        .map(|((x, y), l)| ((x - y) / l).powi(2))
        .sum();
    hyper.signal_var * (-0.5 * r2).exp()
}

/// Fitted posterior. The prior mean is the mean of the targets.
#[derive(Debug, Clone)]
pub struct Gp {
    x: Vec<Vec<f64>>,
    hyper: GpHyper,
    mean: f64,
    chol_l: DMatrix<f64>,
    alpha: DVector<f64>,
    jitter: f64,
    log_det: f64,
    quad: f64,
}

impl Gp {
    pub fn fit(x: &[Vec<f64>], y: &[f64], hyper: GpHyper) -> Result<Self> {
        if x.is_empty() || x.len() != y.len() {
            return Err(Error::InvalidArgument("GP needs matching, nonempty inputs and targets".into()));
        }
        if !(hyper.noise_var > 0.0) {
            return Err(Error::InvalidArgument("GP noise variance must be positive".into()));
        }
        let n = x.len();
        let mean = y.iter().sum::<f64>() / n as f64;
        let gram = DMatrix::from_fn(n, n, |i, j| kernel(&x[i], &x[j], &hyper));
        let resid = DVector::from_iterator(n, y.iter().map(|v| v - mean));

        let mut last_jitter = 0.0;
        for &rel in &JITTER_STEPS {
            let jitter = rel * hyper.signal_var;
            last_jitter = jitter;
            let mut k = gram.clone();
            for i in 0..n {
                k[(i, i)] += hyper.noise_var + jitter;
            }
            if let Some(chol) = k.cholesky() {
                let alpha = chol.solve(&resid);
                let chol_l = chol.unpack();
                let log_det = 2.0 * chol_l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
                let quad = resid.dot(&alpha);
                return Ok(Self {
                    x: x.to_vec(),
                    hyper,
                    mean,
                    chol_l,
                    alpha,
                    jitter,
                    log_det,
                    quad,
                });
            }
        }
        Err(Error::NotPositiveDefinite { jitter: last_jitter })
    }

    pub fn hyper(&self) -> &GpHyper {
        &self.hyper
    }

    pub fn prior_mean(&self) -> f64 {
        self.mean
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Posterior mean and standard deviation of the latent function.
    pub fn predict(&self, q: &[f64]) -> (f64, f64) {
        let n = self.x.len();
        let k = DVector::from_iterator(n, self.x.iter().map(|xi| kernel(xi, q, &self.hyper)));
        let mu = self.mean + k.dot(&self.alpha);
        let v = self
            .chol_l
            .solve_lower_triangular(&k)
            .expect("Cholesky factor has a positive diagonal");
        let var = (self.hyper.signal_var - v.norm_squared()).max(0.0);
        (mu, var.sqrt())
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.x.len() as f64;
        -0.5 * self.quad - 0.5 * self.log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
    }
}

/// Lengthscale search bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthscaleBounds {
    pub lo: f64,
    pub hi: f64,
}

/// Re-estimates lengthscales by coordinate search on the log marginal
/// likelihood in log space, from the current value, the all-`fallback`
/// vector and `extra_starts` random points. Signal and noise variances are
/// held fixed.
pub fn fit_lengthscales<R: Rng>(
    x: &[Vec<f64>],
    y: &[f64],
    hyper: &GpHyper,
    bounds: LengthscaleBounds,
    fallback: f64,
    extra_starts: usize,
    rng: &mut R,
) -> Result<GpHyper> {
    let dim = hyper.lengthscales.len();
    let (llo, lhi) = (bounds.lo.ln(), bounds.hi.ln());
    let score = |logl: &[f64]| -> f64 {
        let h = GpHyper {
            lengthscales: logl.iter().map(|v| v.exp()).collect(),
            ..hyper.clone()
        };
        match Gp::fit(x, y, h) {
            Ok(gp) => gp.log_marginal_likelihood(),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let mut starts: Vec<Vec<f64>> = vec![
        hyper.lengthscales.iter().map(|l| l.ln().clamp(llo, lhi)).collect(),
        vec![fallback.ln().clamp(llo, lhi); dim],
    ];
    for _ in 0..extra_starts {
        starts.push((0..dim).map(|_| rng.gen_range(llo..=lhi)).collect());
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in starts {
        let mut cur = start;
        let mut cur_score = score(&cur);
        let mut step = 1.0;
        while step > 1e-2 {
            let mut moved = false;
            for d in 0..dim {
                for dir in [1.0, -1.0] {
                    let mut cand = cur.clone();
                    cand[d] = (cand[d] + dir * step).clamp(llo, lhi);
                    if cand[d] == cur[d] {
                        continue;
                    }
                    let s = score(&cand);
                    if s > cur_score {
                        cur = cand;
                        cur_score = s;
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if best.as_ref().is_none_or(|(s, _)| cur_score > *s) {
            best = Some((cur_score, cur));
        }
    }
    let (s, logl) = best.expect("at least one start");
    if !s.is_finite() {
        return Err(Error::NotPositiveDefinite { jitter: JITTER_STEPS[JITTER_STEPS.len() - 1] * hyper.signal_var });
    }
    Ok(GpHyper {
        lengthscales: logl.iter().map(|v| v.exp()).collect(),
        ..hyper.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyper(l: f64, sf: f64) -> GpHyper {
        GpHyper {
            lengthscales: vec![l],
            signal_var: sf,
            noise_var: 1e-6,
        }
    }

    #[test]
    fn interpolates_single_observation() {
        let gp = Gp::fit(&[vec![3.0]], &[0.7], hyper(2.0, 1.0)).unwrap();
        let (mu, sd) = gp.predict(&[3.0]);
        assert!((mu - 0.7).abs() < 1e-3);
        assert!(sd < 1e-2);
    }

    #[test]
    fn reverts_to_prior_far_away() {
        let x = vec![vec![1.0], vec![2.0]];
        let gp = Gp::fit(&x, &[0.2, 0.4], hyper(0.5, 0.3)).unwrap();
        let (mu, sd) = gp.predict(&[500.0]);
        assert!((mu - 0.3).abs() < 1e-12);
        assert!((sd * sd - 0.3).abs() < 1e-12);
    }

    #[test]
    fn duplicate_points_stay_positive_definite() {
        let x = vec![vec![1.0]; 5];
        let gp = Gp::fit(&x, &[0.1, 0.1, 0.1, 0.1, 0.1], hyper(1.0, 1.0)).unwrap();
        assert!(gp.predict(&[1.0]).0.is_finite());
    }

    #[test]
    fn rejects_zero_noise() {
        let h = GpHyper { noise_var: 0.0, ..hyper(1.0, 1.0) };
        assert!(Gp::fit(&[vec![0.0]], &[0.0], h).is_err());
    }
}
