use statrs::distribution::{Continuous, ContinuousCDF, Normal};

/// Expected improvement below `best` for a Gaussian prediction `N(mu, sigma^2)`.
pub fn expected_improvement(mu: f64, sigma: f64, best: f64) -> f64 {
    let gain = best - mu;
    if !(sigma > 0.0) {
        return gain.max(0.0);
    }
    let z = gain / sigma;
    let std = Normal::standard();
    (gain * std.cdf(z) + sigma * std.pdf(z)).max(0.0)
}
