//! Linear soft-margin SVM trained by full-batch subgradient descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, epochs: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Best objective value seen up to each epoch.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) >= 0.0
    }
}

fn objective(w: &[f64], b: f64, x: &[Vec<f64>], y: &[f64], lambda: f64) -> f64 {
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (1.0 - yi * (w.iter().zip(xi).map(|(a, c)| a * c).sum::<f64>() + b)).max(0.0))
        .sum();
    0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>() + hinge / x.len() as f64
}

/// Minimizes `lambda/2 |w|^2 + mean hinge` with `lambda = 1/(C n)` and step
/// `1/(lambda t)`. The bias is not regularized. Returns the iterate with the
/// lowest objective. Labels are `true` for the positive class.
pub fn svm_fit(x: &[Vec<f64>], labels: &[bool], config: &SvmConfig) -> Result<SvmModel> {
    let n = x.len();
    if n == 0 || labels.len() != n {
        return Err(Error::InvalidArgument("SVM needs matching, nonempty rows and labels".into()));
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::InvalidArgument("SVM needs both classes".into()));
    }
    if !(config.c > 0.0) || config.epochs == 0 {
        return Err(Error::InvalidArgument("SVM needs C > 0 and at least one epoch".into()));
    }
    let d = x[0].len();
    if x.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidArgument("SVM rows differ in length".into()));
    }
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let lambda = 1.0 / (config.c * n as f64);

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut best = (objective(&w, b, x, &y, lambda), w.clone(), b);
    let mut trace = Vec::with_capacity(config.epochs);
    let mut gw = vec![0.0; d];
    for t in 1..=config.epochs {
        let eta = 1.0 / (lambda * t as f64);
        gw.iter_mut().zip(&w).for_each(|(g, wi)| *g = lambda * wi);
        let mut gb = 0.0;
        for (xi, yi) in x.iter().zip(&y) {
            let margin = yi * (w.iter().zip(xi).map(|(a, c)| a * c).sum::<f64>() + b);
            if margin < 1.0 {
                for (g, v) in gw.iter_mut().zip(xi) {
                    *g -= yi * v / n as f64;
                }
                gb -= yi / n as f64;
            }
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= eta * g;
        }
        b -= eta * gb;
        let obj = objective(&w, b, x, &y, lambda);
        if obj < best.0 {
            best = (obj, w.clone(), b);
        }
        trace.push(best.0);
    }
    Ok(SvmModel {
        weights: best.1,
        bias: best.2,
        objective_trace: trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub positive: ClassMetrics,
    pub negative: ClassMetrics,
}

fn class_metrics(tp: usize, fp: usize, fn_: usize) -> ClassMetrics {
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support: tp + fn_,
    }
}

pub fn classification_report(truth: &[bool], predicted: &[bool]) -> ClassificationReport {
    let mut m = [[0usize; 2]; 2];
    for (&t, &p) in truth.iter().zip(predicted) {
        m[t as usize][p as usize] += 1;
    }
    let total = truth.len().max(1) as f64;
    ClassificationReport {
        accuracy: (m[0][0] + m[1][1]) as f64 / total,
        positive: class_metrics(m[1][1], m[0][1], m[1][0]),
        negative: class_metrics(m[0][0], m[1][0], m[0][1]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let e = (i as f64 * 0.37).sin() * 0.2;
            x.push(vec![0.2 + e, 0.3 - e]);
            y.push(false);
            x.push(vec![0.8 - e, 0.7 + e]);
            y.push(true);
        }
        (x, y)
    }

    #[test]
    fn separates_blobs() {
        let (x, y) = blobs();
        let m = svm_fit(&x, &y, &SvmConfig::default()).unwrap();
        let pred: Vec<bool> = x.iter().map(|r| m.predict(r)).collect();
        assert_eq!(classification_report(&y, &pred).accuracy, 1.0);
        assert!(m.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn single_class_rejected() {
        assert!(svm_fit(&[vec![1.0], vec![2.0]], &[true, true], &SvmConfig::default()).is_err());
    }

    #[test]
    fn report_counts() {
        let r = classification_report(&[true, true, false, false], &[true, false, false, true]);
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.positive.precision, 0.5);
        assert_eq!(r.negative.support, 2);
    }
}
