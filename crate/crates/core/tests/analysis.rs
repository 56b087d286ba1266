mod common;

use common::three_stop_fixture;
use hrlp::analysis::{
    extract_features, ols, raw_features, svm_fit, welch_t_test, RegressionResult, SvmConfig,
};
use hrlp::synth::{synth_suite, SynthSpec};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn residuals(x: &[Vec<f64>], y: &[f64], fit: &RegressionResult) -> Vec<f64> {
    let b = fit.estimates();
    x.iter()
        .zip(y)
        .map(|(row, yi)| yi - b[0] - row.iter().zip(&b[1..]).map(|(v, c)| v * c).sum::<f64>())
        .collect()
}

#[test]
fn planted_coefficients_recovered_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.gen_range(-5.0..5.0), rng.gen_range(0.0..3.0)]).collect();
    let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] - 3.0 * r[1]).collect();
    let fit = ols(&x, &y, &["x1", "x2"]).unwrap();
    let b = fit.estimates();
    assert!(b[0].abs() < 1e-9);
    assert!((b[1] - 2.0).abs() < 1e-9);
    assert!((b[2] + 3.0).abs() < 1e-9);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
}

#[test]
fn residuals_are_orthogonal_to_design() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = x
        .iter()
        .map(|r| 0.5 + r[0] - r[2] + 0.3 * { let v: f64 = StandardNormal.sample(&mut rng); v })
        .collect::<Vec<f64>>();
    let fit = ols(&x, &y, &["a", "b", "c", "d"]).unwrap();
    let e = residuals(&x, &y, &fit);
    assert!(e.iter().sum::<f64>().abs() < 1e-10);
    for k in 0..4 {
        let dot: f64 = x.iter().zip(&e).map(|(r, ei)| r[k] * ei).sum();
        assert!(dot.abs() < 1e-10, "column {k}: {dot}");
    }
}

#[test]
fn noise_targets_give_small_t_statistics() {
    let mut large = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..50).map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let fit = ols(&x, &y, &["a", "b", "c"]).unwrap();
        if fit.coefficients[1..].iter().any(|c| c.t.abs() >= 4.0) {
            large += 1;
        }
    }
    assert!(large <= 1, "{large} runs had |t| >= 4");
}

fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..80 {
        let positive = i % 2 == 0;
        let c = if positive { (2.0, 2.0) } else { (-2.0, -1.5) };
        x.push(vec![c.0 + rng.gen_range(-1.0..1.0), c.1 + rng.gen_range(-1.0..1.0)]);
        y.push(positive);
    }
    (x, y)
}

#[test]
fn separable_blobs_fit_perfectly() {
    for seed in 0..5 {
        let (x, y) = blobs(seed);
        let model = svm_fit(&x, &y, &SvmConfig::default()).unwrap();
        let correct = x.iter().zip(&y).filter(|(r, l)| model.predict(r) == **l).count();
        assert_eq!(correct, x.len(), "seed {seed}");
        assert!(model.objective_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn flipping_features_flips_weights() {
    let (x, y) = blobs(9);
    let flipped: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
    let config = SvmConfig { c: 1.0, epochs: 2000 };
    let a = svm_fit(&x, &y, &config).unwrap();
    let b = svm_fit(&flipped, &y, &config).unwrap();
    for (wa, wb) in a.weights.iter().zip(&b.weights) {
        assert!((wa + wb).abs() < 1e-12);
    }
    assert!((a.bias - b.bias).abs() < 1e-12);
}

#[test]
fn welch_identical_and_shifted_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a: Vec<f64> = (0..40).map(|_| rng.gen_range(0.0..1.0)).collect();
    let same = welch_t_test(&a, &a);
    assert_eq!(same.diff, 0.0);
    assert!((same.p - 1.0).abs() < 1e-12);

    let base: Vec<f64> = (0..30).map(|_| 1.0 + 0.01 * { let v: f64 = StandardNormal.sample(&mut rng); v }).collect::<Vec<f64>>();
    let shifted: Vec<f64> = (0..30).map(|_| 1.5 + 0.01 * { let v: f64 = StandardNormal.sample(&mut rng); v }).collect::<Vec<f64>>();
    let r = welch_t_test(&base, &shifted);
    assert!((r.diff - 0.5).abs() < 0.02);
    assert!(r.p < 0.01);
}

#[test]
fn welch_matches_reference_values() {
    // reference from an independent statistics package
    let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 6.0, 8.0, 11.0]);
    assert!((r.t - 1.866_277_899_263_374).abs() < 1e-12);
    assert!((r.dof - 5.573_280_030_949_771).abs() < 1e-9);
    assert!((r.p - 0.114_990_160_529_918_87).abs() < 1e-8);
}

#[test]
fn raw_features_hand_fixture() {
    let f = raw_features(&three_stop_fixture()).unwrap();
    // deliveries, D->A->B->D, first zone {A}, last zone {B},
    // volumes {24, 3}, depot times {10, 20}, pair times {5, 15}
    let expected = [2.0, 55.0, 10.0, 20.0, 13.5, 10.5, 5.0, 5.0];
    for k in 0..8 {
        assert!((f[k] - expected[k]).abs() < 1e-12, "feature {k}: {} vs {}", f[k], expected[k]);
    }
}

#[test]
fn identical_instances_normalize_to_zero() {
    let inst = three_stop_fixture();
    let rows = extract_features(&[(&inst, 0.1), (&inst, 0.2), (&inst, 0.0)]).unwrap();
    assert!(rows.iter().all(|r| r.features == [0.0; 8]));
    assert_eq!(rows[2].log_score, None);
}

#[test]
fn extraction_ignores_corpus_order() {
    let routes = synth_suite(&SynthSpec { seed: 8, n_zones: 3, stops_per_zone: (2, 6), ..Default::default() }, 12, 2).unwrap();
    let scored: Vec<_> = routes.iter().enumerate().map(|(k, r)| (r, 0.01 * k as f64)).collect();
    let mut shuffled = scored.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(0));
    let mut a = extract_features(&scored).unwrap();
    let mut b = extract_features(&shuffled).unwrap();
    a.sort_by(|x, y| x.route_id.cmp(&y.route_id));
    b.sort_by(|x, y| x.route_id.cmp(&y.route_id));
    assert_eq!(a, b);

    for k in 0..8 {
        let col: Vec<f64> = a.iter().map(|r| r.features[k]).collect();
        assert!(col.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
