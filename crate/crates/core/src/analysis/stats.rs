use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WelchResult {
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean_b - mean_a`.
    pub diff: f64,
    pub t: f64,
    pub dof: f64,
    pub p: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = if xs.len() > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

/// Two-sided Welch two-sample t-test. Both samples must be nonempty.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> WelchResult {
    assert!(!a.is_empty() && !b.is_empty(), "both samples must be nonempty");
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let diff = mb - ma;
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if !(se2 > 0.0) {
        let (t, p) = if diff == 0.0 { (0.0, 1.0) } else { (diff.signum() * f64::INFINITY, 0.0) };
        return WelchResult {
            mean_a: ma,
            mean_b: mb,
            diff,
            t,
            dof: na + nb - 2.0,
            p,
        };
    }
    let t = diff / se2.sqrt();
    let mut denom = 0.0;
    if na > 1.0 {
        denom += sa * sa / (na - 1.0);
    }
    if nb > 1.0 {
        denom += sb * sb / (nb - 1.0);
    }
    let dof = if denom > 0.0 { se2 * se2 / denom } else { na + nb - 2.0 };
    let p = match StudentsT::new(0.0, 1.0, dof.max(1e-9)) {
        Ok(dist) => (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0),
        Err(_) => f64::NAN,
    };
    WelchResult {
        mean_a: ma,
        mean_b: mb,
        diff,
        t,
        dof,
        p,
    }
}
