use hrlp::routing::{
    brute_force, is_permutation, savings_path, savings_tour, two_opt_path, two_opt_tour, BruteMode, CostMatrix, Path, Tour,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn euclidean(n: usize, rng: &mut ChaCha8Rng) -> CostMatrix {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0))).collect();
    CostMatrix::from_fn(n, |i, j| ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt()).unwrap()
}

/// Optimal tour by recursive enumeration, independent of the library oracle.
fn reference_tour_cost(c: &CostMatrix, depot: usize) -> f64 {
    fn go(c: &CostMatrix, at: usize, depot: usize, left: &mut Vec<usize>, acc: f64, best: &mut f64) {
        if left.is_empty() {
            *best = best.min(acc + c.get(at, depot));
            return;
        }
        for k in 0..left.len() {
            let v = left.remove(k);
            go(c, v, depot, left, acc + c.get(at, v), best);
            left.insert(k, v);
        }
    }
    let mut left: Vec<usize> = (0..c.len()).filter(|&v| v != depot).collect();
    let mut best = f64::INFINITY;
    go(c, depot, depot, &mut left, 0.0, &mut best);
    best
}

#[test]
fn brute_force_agrees_with_reference_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.gen_range(2..=7);
        let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(1..50) as f64).collect();
        let c = CostMatrix::from_flat(n, data).unwrap();
        let (order, cost) = brute_force(&c, BruteMode::Tour { depot: 0 }).unwrap();
        assert_eq!(cost, reference_tour_cost(&c, 0));
        assert_eq!(c.tour_cost(&order), cost);
    }
}

#[test]
fn savings_within_budget_of_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 1.0;
    for _ in 0..100 {
        let c = euclidean(8, &mut rng);
        let t = savings_tour(&c, 0).unwrap();
        let opt = brute_force(&c, BruteMode::Tour { depot: 0 }).unwrap().1;
        let ratio = t.cost(&c) / opt;
        assert!(ratio >= 1.0 - 1e-12);
        worst = worst.max(ratio);

        let c = euclidean(7, &mut rng);
        let p = savings_path(&c, 0, 6).unwrap();
        let opt = brute_force(&c, BruteMode::Path { origin: 0, destination: 6 }).unwrap().1;
        let ratio = p.cost(&c) / opt;
        assert!(ratio >= 1.0 - 1e-12);
        worst = worst.max(ratio);
    }
    assert!(worst <= 1.25, "worst ratio {worst}");
}

#[test]
fn constant_shift_keeps_optimal_tour() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let c = euclidean(7, &mut rng);
        let shifted = CostMatrix::from_fn(7, |i, j| c.get(i, j) + 25.0).unwrap();
        let a = brute_force(&c, BruteMode::Tour { depot: 0 }).unwrap();
        let b = brute_force(&shifted, BruteMode::Tour { depot: 0 }).unwrap();
        assert!((shifted.tour_cost(&a.0) - b.1).abs() < 1e-9);
    }
}

#[test]
fn deterministic_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = euclidean(9, &mut rng);
    assert_eq!(savings_tour(&c, 2).unwrap(), savings_tour(&c, 2).unwrap());
    assert_eq!(savings_path(&c, 1, 5).unwrap(), savings_path(&c, 1, 5).unwrap());
}

fn matrix_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..12).prop_flat_map(|n| (Just(n), prop::collection::vec(0.0f64..100.0, n * n)))
}

proptest! {
    #[test]
    fn tours_are_permutations((n, data) in matrix_strategy(), depot in 0usize..12) {
        let depot = depot % n;
        let c = CostMatrix::from_flat(n, data).unwrap();
        let t = savings_tour(&c, depot).unwrap();
        prop_assert!(is_permutation(&t.order, n));
        prop_assert_eq!(t.order[0], depot);
        let mut improved = t.clone();
        two_opt_tour(&c, &mut improved);
        prop_assert!(is_permutation(&improved.order, n));
        prop_assert!(improved.cost(&c) <= t.cost(&c) + 1e-9);
    }

    #[test]
    fn paths_keep_endpoints((n, data) in matrix_strategy(), o in 0usize..12, d in 0usize..12) {
        let (o, d) = (o % n, d % n);
        prop_assume!(o != d);
        let c = CostMatrix::from_flat(n, data).unwrap();
        let p = savings_path(&c, o, d).unwrap();
        prop_assert!(is_permutation(&p.order, n));
        prop_assert_eq!((p.order[0], p.order[n - 1]), (o, d));
        let mut improved = Path { order: p.order.clone() };
        two_opt_path(&c, &mut improved);
        prop_assert_eq!((improved.order[0], improved.order[n - 1]), (o, d));
        prop_assert!(improved.cost(&c) <= p.cost(&c) + 1e-9);
    }

    #[test]
    fn heuristic_never_beats_oracle((n, data) in (2usize..8).prop_flat_map(|n| (Just(n), prop::collection::vec(0.0f64..100.0, n * n)))) {
        let c = CostMatrix::from_flat(n, data).unwrap();
        let opt = brute_force(&c, BruteMode::Tour { depot: 0 }).unwrap().1;
        let tour: Tour = savings_tour(&c, 0).unwrap();
        prop_assert!(tour.cost(&c) >= opt - 1e-9);
    }
}
