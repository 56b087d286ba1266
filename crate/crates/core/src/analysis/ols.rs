//! Ordinary least squares with an intercept.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionResult {
    /// Intercept first, then one entry per column.
    pub coefficients: Vec<Coefficient>,
    pub n_obs: usize,
    pub r_squared: f64,
    pub residual_std_error: f64,
}

impl RegressionResult {
    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }
}

/// Relative pivot size below which a column counts as collinear.
const RANK_TOL: f64 = 1e-10;

/// Fits `y = b0 + sum_k b_k x_k` by QR. `names` labels the columns of `x`.
pub fn ols(x: &[Vec<f64>], y: &[f64], names: &[&str]) -> Result<RegressionResult> {
    let n = y.len();
    let k = names.len();
    let p = k + 1;
    if x.len() != n || x.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidArgument("design rows must match targets and column names".into()));
    }
    if n <= p {
        return Err(Error::InvalidArgument(format!("need more than {p} observations, got {n}")));
    }
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
    let target = DVector::from_column_slice(y);

    let qr = design.clone().qr();
    let r = qr.r();
    let scale = (0..p).map(|j| design.column(j).norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let collinear: Vec<String> = (0..p)
        .filter(|&j| r[(j, j)].abs() <= RANK_TOL * scale)
        .map(|j| if j == 0 { "intercept".to_owned() } else { names[j - 1].to_owned() })
        .collect();
    if !collinear.is_empty() {
        return Err(Error::RankDeficient(collinear));
    }

    let qty = qr.q().transpose() * &target;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient(vec!["design".into()]))?;
    let resid = &target - &design * &beta;
    let rss = resid.norm_squared();
    let dof = (n - p) as f64;
    let sigma2 = rss / dof;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::RankDeficient(vec!["design".into()]))?;
    let ymean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ymean).powi(2)).sum();
    let t_dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let coefficients = (0..p)
        .map(|j| {
            // diag of (R^T R)^-1 = squared row norms of R^-1
            let var = sigma2 * r_inv.row(j).norm_squared();
            let se = var.sqrt();
            let est = beta[j];
            let t = if se > 0.0 { est / se } else if est == 0.0 { 0.0 } else { est.signum() * f64::INFINITY };
            let pval = if t.is_finite() { 2.0 * (1.0 - t_dist.cdf(t.abs())) } else { 0.0 };
            Coefficient {
                name: if j == 0 { "intercept".into() } else { names[j - 1].into() },
                estimate: est,
                std_error: se,
                t,
                p: pval,
            }
        })
        .collect();
    Ok(RegressionResult {
        coefficients,
        n_obs: n,
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        residual_std_error: sigma2.sqrt(),
    })
}
