//! Optional 2-opt polishing. Off by default in every pipeline.

use super::{CostMatrix, Path, Tour};

/// Reverses segments of `order[lo..=hi]` ranges with `first <= lo`,
/// `hi <= last` while that lowers the cost of `order` read as a path.
/// Arc directions are respected, so asymmetric costs are handled.
fn two_opt(costs: &CostMatrix, order: &mut [usize], first: usize, last: usize) {
    if last <= first {
        return;
    }
    loop {
        let len = order.len();
        let mut fwd = vec![0.0; len];
        let mut rev = vec![0.0; len];
        for k in 1..len {
            fwd[k] = fwd[k - 1] + costs.get(order[k - 1], order[k]);
            rev[k] = rev[k - 1] + costs.get(order[k], order[k - 1]);
        }
        let mut improved = false;
        'search: for lo in first..last {
            for hi in lo + 1..=last {
                let before = order[lo - 1];
                let after = order[hi + 1];
                let old = costs.get(before, order[lo]) + costs.get(order[hi], after) + (fwd[hi] - fwd[lo]);
                let new = costs.get(before, order[hi]) + costs.get(order[lo], after) + (rev[hi] - rev[lo]);
                if new < old - 1e-9 * old.abs().max(1.0) {
                    order[lo..=hi].reverse();
                    improved = true;
                    break 'search;
                }
            }
        }
        if !improved {
            return;
        }
    }
}

pub fn two_opt_tour(costs: &CostMatrix, tour: &mut Tour) {
    if tour.order.len() < 3 {
        return;
    }
    let mut closed = tour.order.clone();
    closed.push(tour.order[0]);
    let last = closed.len() - 2;
    two_opt(costs, &mut closed, 1, last);
    closed.pop();
    tour.order = closed;
}

pub fn two_opt_path(costs: &CostMatrix, path: &mut Path) {
    if path.order.len() < 4 {
        return;
    }
    let last = path.order.len() - 2;
    two_opt(costs, &mut path.order, 1, last);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::{brute_force, savings_tour, BruteMode};

    #[test]
    fn two_opt_never_worsens_and_fixes_crossing() {
        // square corners visited in crossing order
        let pts: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)];
        let c = CostMatrix::from_fn(4, |i, j| {
            let (a, b) = (pts[i], pts[j]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        })
        .unwrap();
        let mut t = Tour { order: vec![0, 1, 2, 3] };
        let before = t.cost(&c);
        two_opt_tour(&c, &mut t);
        assert!(t.cost(&c) < before);
        assert!((t.cost(&c) - brute_force(&c, BruteMode::Tour { depot: 0 }).unwrap().1).abs() < 1e-12);
        assert_eq!(t.order[0], 0);

        let mut s = savings_tour(&c, 0).unwrap();
        let base = s.cost(&c);
        two_opt_tour(&c, &mut s);
        assert!(s.cost(&c) <= base);
    }

    #[test]
    fn path_endpoints_fixed() {
        let c = CostMatrix::from_fn(6, |i, j| ((i as f64) - (j as f64)).abs() + ((i * j) % 3) as f64).unwrap();
        let mut p = Path { order: vec![0, 4, 1, 3, 2, 5] };
        let before = p.cost(&c);
        two_opt_path(&c, &mut p);
        assert!(p.cost(&c) <= before);
        assert_eq!((p.order[0], p.order[5]), (0, 5));
    }
}
